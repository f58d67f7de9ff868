#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "kmsf/ifs.hpp"
#include "kmsf/piecewise_polynomial.hpp"

namespace kmsf {

template <int D>
struct TestFunction {
  std::string name;
  std::function<double(const VecD<D>&)> fn;
  std::optional<PiecewisePolynomial> exact;  // interval systems only
  bool vanishes_on_B = false;
  bool positive = false;
  double sup_bound = 1.0;  // sup |a| over the box, by construction
  double lipschitz = 0.0;  // upper bound

  double operator()(const VecD<D>& y) const { return fn(y); }
};

template <int D>
struct TestFunctionFamily {
  std::vector<TestFunction<D>> members;
  std::string provenance;

  std::vector<const TestFunction<D>*> vanishing() const {
    std::vector<const TestFunction<D>*> out;
    for (const auto& m : members)
      if (m.vanishes_on_B) out.push_back(&m);
    return out;
  }
  std::vector<const TestFunction<D>*> positive() const {
    std::vector<const TestFunction<D>*> out;
    for (const auto& m : members)
      if (m.positive) out.push_back(&m);
    return out;
  }
  std::vector<const TestFunction<D>*> all() const {
    std::vector<const TestFunction<D>*> out;
    for (const auto& m : members) out.push_back(&m);
    return out;
  }
};

inline constexpr std::uint64_t kFamilySeed = 20240611;

// Family on [0,1]: monomials, (2y-1)^k, grid bumps, |y - 1/2| and (y - 1/2)
// products, seeded piecewise-linear functions and their products with the
// distance to B. Every member carries an exact piecewise-polynomial form.
TestFunctionFamily<1> interval_family(const std::vector<Rational>& branch_points,
                                      std::uint64_t seed = kFamilySeed);

// Family on a planar box: normalised monomials, radial bumps, products with
// the distance to B and seeded bump sums.
TestFunctionFamily<2> planar_family(const Box<2>& box, const std::vector<VecD<2>>& branch_points,
                                    std::uint64_t seed = kFamilySeed);

}  // namespace kmsf

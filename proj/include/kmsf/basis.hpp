#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <memory>
#include <string>
#include <vector>

#include "kmsf/bimodule.hpp"
#include "kmsf/error.hpp"
#include "kmsf/parallel.hpp"

namespace kmsf {

// r_0 = 0; r_i(x) = 0 on [0, P/2i], (2i/P)x - 1 on [P/2i, P/i], 1 beyond.
class RampFamily {
 public:
  explicit RampFamily(double P);

  double P() const { return P_; }
  double r(long i, double x) const;
  double v(long i, double x) const { return std::sqrt(v_sq(i, x)); }
  // v_i(x)^2 = r_i(x) - r_{i-1}(x), without the square root round trip
  double v_sq(long i, double x) const;
  // sum_{k<=i} v_k(x)^2, compensated
  double telescoped(long i, double x) const;
  // i_delta = ceil(P / delta): r_i(x) = 1 for all i >= i_delta when x >= delta
  long saturation_index(double delta) const;

 private:
  double P_;
};

// The n-branch family around one branch value:
//   u_1 = 1/sqrt(n),
//   u_{1+(n-1)(i-1)+l}(gamma_j(y), y) = n^{-1/2} w^{l j} v_i(d(y, c)),  w = e^{2 pi i/n}.
class NBranchBasis {
 public:
  NBranchBasis(int n, double P);

  int n() const { return n_; }
  const RampFamily& ramp() const { return ramp_; }
  bool finite() const { return n_ == 1; }

  struct Index {
    long i = 0;  // ramp level (0 for u_1)
    int l = 0;   // root-of-unity power (0 for u_1)
  };
  static Index split(std::size_t k, int n);

  // jpos is the 1-based position of the map inside the sub-module
  Complex value(std::size_t k, int jpos, double dist) const;
  double abs2(std::size_t k, double dist) const;

 private:
  int n_;
  RampFamily ramp_;
};

// w^p for w = e^{2 pi i/n}, exact at multiples of the quarter turn
Complex root_of_unity(long p, int n);

// sum_{j=1}^{n} w^{p j}
Complex root_of_unity_sum(long p, int n);

struct PatchedBasisParams {
  std::vector<double> radii;  // rho_i per branch value; empty = default
  double P_factor = 0.5;      // P_i = P_factor * rho_i
};

enum class EnumerationOrder { forward, reversed_within_level };

// Basis of X over a cover of K by balls around the branch values and their
// complement. Families are (patch, sub-module) pairs; u~ = u * psi^{1/2}.
template <int D>
class PatchedBasis {
 public:
  using Point = VecD<D>;

  struct Family {
    int patch = 0;
    int sub = 0;
    std::vector<int> maps;  // 0-based, ascending
    NBranchBasis local;
  };
  struct Term {
    int family = 0;
    std::size_t k = 1;
  };

  PatchedBasis(std::shared_ptr<const BimoduleContext<D>> ctx, PatchedBasisParams params = {});

  const std::shared_ptr<const BimoduleContext<D>>& context() const { return ctx_; }
  std::size_t patch_count() const { return centers_.size() + 1; }
  const std::vector<Point>& centers() const { return centers_; }
  const std::vector<double>& radii() const { return radii_; }
  const std::vector<Family>& families() const { return families_; }

  // psi_i for i < m: radial bump; psi_m = 1 - sum.
  double psi(std::size_t patch, const Point& y) const;
  double psi_sum(const Point& y) const;

  // Terms in enumeration order, level by level (k = 1, 2, ...): one term per
  // family that has a k-th element.
  std::vector<Term> enumerate(std::size_t count, EnumerationOrder order) const;
  // number of terms among the first `levels` levels
  std::size_t terms_in_levels(std::size_t levels) const;
  std::size_t level_one_size() const { return families_.size(); }

  Complex value(const Term& t, std::size_t j, const Point& y) const;
  double abs2(const Term& t, std::size_t j, const Point& y) const;

  // The term as an element of X (components checked for compatibility).
  BimoduleElement<D, Complex> element(const Term& t) const;

  std::string describe() const;

  // True when all ramps that are nonzero near y equal 1 at level `levels`
  // (always true at a branch value, where the ramps vanish identically).
  bool saturated_at(const Point& y, std::size_t levels) const;

 private:
  double distance_to_center(std::size_t patch, const Point& y) const;

  std::shared_ptr<const BimoduleContext<D>> ctx_;
  std::vector<Point> centers_;
  std::vector<double> radii_;
  std::vector<Family> families_;
};

struct ReconstructionResult {
  double sup_error = 0.0;
  std::vector<double> profile;  // profile[M-1] = error of the M-term partial sum
  std::size_t saturation_index = 0;
  bool monotone_after_saturation = true;
};

template <int D>
ReconstructionResult verify_reconstruction(const PatchedBasis<D>& basis,
                                           const BimoduleElement<D, double>& f, std::size_t M,
                                           const std::vector<VecD<D>>& grid,
                                           EnumerationOrder order = EnumerationOrder::forward);

struct SumIdentityResult {
  double max_residual = 0.0;
  double branch_residual = 0.0;  // max over grid points lying in C
  std::size_t branch_points_on_grid = 0;
  // grid points where every ramp in play has saturated at K_trunc
  double saturated_residual = 0.0;
  std::size_t saturated_points = 0;
  std::vector<double> level_profile;  // max residual after each level
};

// sum_k (u_k | a u_k)_A(y) against a~(y), truncated at K_trunc levels.
template <int D>
SumIdentityResult verify_sum_identity(const PatchedBasis<D>& basis, const AlgebraElement<D>& a,
                                      std::size_t K_trunc, const std::vector<VecD<D>>& grid);

// Partial sum at one point, per level.
template <int D>
double basis_sum_at(const PatchedBasis<D>& basis, const AlgebraElement<D>& a, std::size_t K_trunc,
                    const VecD<D>& y);

// Partial sums after each level 1..K_trunc at one point.
template <int D>
std::vector<double> basis_partial_sums(const PatchedBasis<D>& basis, const AlgebraElement<D>& a,
                                       std::size_t K_trunc, const VecD<D>& y);

// Branch-compatible test elements f_j = g + phase_j h d_C / diam.
template <int D>
std::vector<std::pair<std::string, BimoduleElement<D, double>>> standard_elements(
    std::shared_ptr<const BimoduleContext<D>> ctx);

// Uniform grid on the box with every branch value appended.
template <int D>
std::vector<VecD<D>> standard_grid(const Box<D>& box, const BimoduleContext<D>& ctx,
                                   std::size_t per_axis);

extern template class PatchedBasis<1>;
extern template class PatchedBasis<2>;

}  // namespace kmsf

#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "kmsf/branching.hpp"
#include "kmsf/error.hpp"
#include "kmsf/ifs.hpp"
#include "kmsf/point_set.hpp"

namespace kmsf {

using Complex = std::complex<double>;

inline double conj_of(double x) { return x; }
inline Complex conj_of(const Complex& x) { return std::conj(x); }
inline double abs2_of(double x) { return x * x; }
inline double abs2_of(const Complex& x) { return std::norm(x); }

// Floating copy of the system and its branch structure; shared by all
// elements built over the same system.
template <int D>
struct BimoduleContext {
  using Point = VecD<D>;
  struct Pair {
    Point y;
    Point x;
    std::vector<int> maps;
  };

  std::vector<std::function<Point(const Point&)>> maps;
  std::vector<Point> branch_values;
  std::vector<Point> branch_points;
  std::vector<Pair> pairs;
  double tol = 1e-12;
  double diameter = 1.0;

  std::size_t n() const { return maps.size(); }

  // index into branch_values, or -1
  int branch_value_index(const Point& y) const {
    for (std::size_t i = 0; i < branch_values.size(); ++i)
      if ((branch_values[i] - y).norm() <= tol) return static_cast<int>(i);
    return -1;
  }

  // gamma_j(y); at a branch value the recorded common image is returned for
  // every coinciding map, so coincidences survive rounding.
  Point image(std::size_t j, const Point& y) const {
    if (branch_value_index(y) >= 0) {
      for (const auto& p : pairs) {
        if ((p.y - y).norm() > tol) continue;
        if (std::find(p.maps.begin(), p.maps.end(), static_cast<int>(j)) != p.maps.end())
          return p.x;
      }
    }
    return maps[j](y);
  }

  // Maps grouped by common image at y; singletons off C.
  std::vector<std::vector<int>> image_groups(const Point& y) const {
    std::vector<std::vector<int>> groups;
    std::vector<char> used(n(), 0);
    if (branch_value_index(y) >= 0) {
      for (const auto& p : pairs) {
        if ((p.y - y).norm() > tol) continue;
        groups.push_back(p.maps);
        for (int j : p.maps) used[j] = 1;
      }
    }
    for (std::size_t j = 0; j < n(); ++j)
      if (!used[j]) groups.push_back({static_cast<int>(j)});
    std::sort(groups.begin(), groups.end());
    return groups;
  }
};

template <class S, int D>
std::shared_ptr<const BimoduleContext<D>> make_context(const IfsSystem<S, D>& ifs,
                                                       const BranchReport<S, D>& rep) {
  auto ctx = std::make_shared<BimoduleContext<D>>();
  const auto fifs = ifs.template cast<double>();
  for (const auto& m : fifs.maps()) ctx->maps.push_back([m](const VecD<D>& y) { return m(y); });
  for (const auto& y : rep.branch_values) ctx->branch_values.push_back(to_double(y));
  for (const auto& x : rep.branch_points) ctx->branch_points.push_back(to_double(x));
  for (const auto& p : rep.pairs) ctx->pairs.push_back({to_double(p.y), to_double(p.x), p.maps});
  ctx->diameter = ifs.box().diameter();
  ctx->tol = 1e-12 * ctx->diameter;
  return ctx;
}

// a in C(K).
template <int D, class T = double>
class AlgebraElement {
 public:
  using Fn = std::function<T(const VecD<D>&)>;

  AlgebraElement() : fn_([](const VecD<D>&) { return T(0); }) {}
  explicit AlgebraElement(Fn f) : fn_(std::move(f)) {}
  static AlgebraElement constant(T c) {
    return AlgebraElement([c](const VecD<D>&) { return c; });
  }

  T operator()(const VecD<D>& y) const { return fn_(y); }
  const Fn& fn() const { return fn_; }

 private:
  Fn fn_;
};

// f in C(C_gamma), stored as components f_j(y) = f(gamma_j(y), y).
template <int D, class T = double>
class BimoduleElement {
 public:
  using Point = VecD<D>;
  using Fn = std::function<T(const Point&)>;

  static constexpr double kCompatibilityTol = 1e-12;

  BimoduleElement(std::shared_ptr<const BimoduleContext<D>> ctx, std::vector<Fn> components)
      : ctx_(std::move(ctx)), comps_(std::move(components)) {
    if (comps_.size() != ctx_->n())
      throw ShapeError("element has " + std::to_string(comps_.size()) + " components, system has " +
                       std::to_string(ctx_->n()) + " maps");
    check_compatible();
  }

  static BimoduleElement constant(std::shared_ptr<const BimoduleContext<D>> ctx, T c) {
    std::vector<Fn> comps(ctx->n(), [c](const Point&) { return c; });
    return BimoduleElement(std::move(ctx), std::move(comps));
  }
  static BimoduleElement zero(std::shared_ptr<const BimoduleContext<D>> ctx) {
    return constant(std::move(ctx), T(0));
  }

  std::size_t size() const { return comps_.size(); }
  const std::shared_ptr<const BimoduleContext<D>>& context() const { return ctx_; }
  T component(std::size_t j, const Point& y) const { return comps_[j](y); }
  const Fn& component_fn(std::size_t j) const { return comps_[j]; }

 private:
  void check_compatible() const {
    for (const auto& p : ctx_->pairs) {
      const T ref = comps_[p.maps.front()](p.y);
      for (int j : p.maps) {
        const T v = comps_[j](p.y);
        const double scale = std::max(1.0, std::sqrt(abs2_of(ref)));
        if (std::sqrt(abs2_of(v - ref)) > kCompatibilityTol * scale)
          throw BranchCompatibilityError(
              "components " + std::to_string(p.maps.front() + 1) + " and " +
              std::to_string(j + 1) + " differ at a branch value");
      }
    }
  }

  std::shared_ptr<const BimoduleContext<D>> ctx_;
  std::vector<Fn> comps_;
};

// (f|g)_A(y) = sum_j conj(f_j(y)) g_j(y)
template <int D, class T>
AlgebraElement<D, T> inner_product(const BimoduleElement<D, T>& f, const BimoduleElement<D, T>& g) {
  if (f.size() != g.size()) throw ShapeError("component count mismatch");
  if (f.context() != g.context() && f.context()->n() != g.context()->n())
    throw ShapeError("elements belong to different systems");
  return AlgebraElement<D, T>([f, g](const VecD<D>& y) {
    T s(0);
    for (std::size_t j = 0; j < f.size(); ++j) s += conj_of(f.component(j, y)) * g.component(j, y);
    return s;
  });
}

// (a.f)(x, y) = a(x) f(x, y)
template <int D, class T, class U>
BimoduleElement<D, T> left_act(const AlgebraElement<D, U>& a, const BimoduleElement<D, T>& f) {
  std::vector<typename BimoduleElement<D, T>::Fn> comps;
  const auto ctx = f.context();
  for (std::size_t j = 0; j < f.size(); ++j)
    comps.push_back([a, f, ctx, j](const VecD<D>& y) {
      return T(a(ctx->image(j, y))) * f.component(j, y);
    });
  return BimoduleElement<D, T>(ctx, std::move(comps));
}

// (f.b)(x, y) = f(x, y) b(y)
template <int D, class T, class U>
BimoduleElement<D, T> right_act(const BimoduleElement<D, T>& f, const AlgebraElement<D, U>& b) {
  std::vector<typename BimoduleElement<D, T>::Fn> comps;
  for (std::size_t j = 0; j < f.size(); ++j)
    comps.push_back([b, f, j](const VecD<D>& y) { return f.component(j, y) * T(b(y)); });
  return BimoduleElement<D, T>(f.context(), std::move(comps));
}

struct Norm2Estimate {
  double value = 0.0;       // max over the grid: a lower bound of the sup norm
  double grid_spacing = 0.0;
  double error_bound = 0.0;  // lipschitz * spacing / 2 when a Lipschitz estimate is given
};

// ||f||_2 = ||(f|f)_A||_inf^{1/2}, sampled on a grid.
template <int D, class T>
Norm2Estimate norm2(const BimoduleElement<D, T>& f, const std::vector<VecD<D>>& grid,
                    double grid_spacing = 0.0, double lipschitz = 0.0) {
  Norm2Estimate e;
  e.grid_spacing = grid_spacing;
  for (const auto& y : grid) {
    double s = 0.0;
    for (std::size_t j = 0; j < f.size(); ++j) s += abs2_of(f.component(j, y));
    e.value = std::max(e.value, std::sqrt(s));
  }
  e.error_bound = lipschitz * grid_spacing / 2.0;
  return e;
}

// a~(y) = sum over distinct images x in gamma(y) of a(x).
template <int D>
class TildeFunction {
 public:
  TildeFunction(AlgebraElement<D> a, std::shared_ptr<const BimoduleContext<D>> ctx)
      : a_(std::move(a)), ctx_(std::move(ctx)) {}

  double operator()(const VecD<D>& y) const {
    double s = 0.0;
    for (const auto& g : ctx_->image_groups(y)) s += a_(ctx_->image(g.front(), y));
    return s;
  }

  // sum_j a(gamma_j(y)), the continuous part
  double uncollapsed(const VecD<D>& y) const {
    double s = 0.0;
    for (const auto& m : ctx_->maps) s += a_(m(y));
    return s;
  }

  const AlgebraElement<D>& base() const { return a_; }

 private:
  AlgebraElement<D> a_;
  std::shared_ptr<const BimoduleContext<D>> ctx_;
};

template <int D>
TildeFunction<D> tilde(const AlgebraElement<D>& a, std::shared_ptr<const BimoduleContext<D>> ctx) {
  return TildeFunction<D>(a, std::move(ctx));
}

// Exact a~(y): images collapsed by exact equality. `a` maps Vec<S,D> to any
// ring type.
template <class S, int D, class F>
auto tilde_value(const IfsSystem<S, D>& ifs, F&& a, const Vec<S, D>& y) {
  PointSet<S, D> images(is_exact_v<S> ? 0.0 : ifs.collision_tolerance());
  for (const auto& m : ifs.maps()) images.insert(m(y));
  auto s = a(images[0]);
  for (std::size_t i = 1; i < images.size(); ++i) s += a(images[i]);
  return s;
}

// 1D CSV: header "y,f_1,...,f_N", one row per grid point.
std::string export_element_csv(const BimoduleElement<1, double>& f, const std::vector<double>& grid);

// Inverse of export_element_csv: piecewise-linear components through the
// sampled values. Compatibility is re-checked.
BimoduleElement<1, double> import_element_csv(std::shared_ptr<const BimoduleContext<1>> ctx,
                                              const std::string& csv);

}  // namespace kmsf

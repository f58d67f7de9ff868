#include "kmsf/basis.hpp"

#include <algorithm>
#include <numbers>
#include <sstream>

namespace kmsf {

RampFamily::RampFamily(double P) : P_(P) {
  if (!(P > 0.0) || !std::isfinite(P)) throw DomainError("ramp scale P must be positive");
}

double RampFamily::r(long i, double x) const {
  if (x < 0.0) throw DomainError("ramp argument must be nonnegative");
  if (i < 0) throw DomainError("ramp index must be nonnegative");
  if (i == 0) return 0.0;
  const double di = static_cast<double>(i);
  if (x <= P_ / (2.0 * di)) return 0.0;
  if (x >= P_ / di) return 1.0;
  return std::clamp(2.0 * di * x / P_ - 1.0, 0.0, 1.0);
}

double RampFamily::v_sq(long i, double x) const {
  if (i < 1) throw DomainError("v_i needs i >= 1");
  return std::max(0.0, r(i, x) - r(i - 1, x));
}

double RampFamily::telescoped(long i, double x) const {
  // Neumaier
  double sum = 0.0, comp = 0.0;
  for (long k = 1; k <= i; ++k) {
    const double t = v_sq(k, x);
    const double s = sum + t;
    if (std::abs(sum) >= std::abs(t))
      comp += (sum - s) + t;
    else
      comp += (t - s) + sum;
    sum = s;
  }
  return sum + comp;
}

long RampFamily::saturation_index(double delta) const {
  if (!(delta > 0.0)) throw DomainError("saturation needs delta > 0");
  return static_cast<long>(std::ceil(P_ / delta));
}

Complex root_of_unity(long p, int n) {
  const long m = ((p % n) + n) % n;
  if ((4 * m) % n == 0) {
    switch ((4 * m) / n) {
      case 0: return {1.0, 0.0};
      case 1: return {0.0, 1.0};
      case 2: return {-1.0, 0.0};
      default: return {0.0, -1.0};
    }
  }
  return std::polar(1.0, 2.0 * std::numbers::pi * static_cast<double>(m) / n);
}

Complex root_of_unity_sum(long p, int n) {
  Complex s{0.0, 0.0};
  for (int j = 1; j <= n; ++j) s += root_of_unity(p * j, n);
  return s;
}

NBranchBasis::NBranchBasis(int n, double P) : n_(n), ramp_(P) {
  if (n < 1) throw DomainError("branch index n must be >= 1");
}

NBranchBasis::Index NBranchBasis::split(std::size_t k, int n) {
  if (k < 1) throw std::out_of_range("basis index starts at 1");
  if (k == 1) return {};
  if (n == 1) throw std::out_of_range("the 1-branch basis has a single element");
  const auto m = static_cast<long>(k - 2);
  return {m / (n - 1) + 1, static_cast<int>(m % (n - 1)) + 1};
}

Complex NBranchBasis::value(std::size_t k, int jpos, double dist) const {
  const double s = 1.0 / std::sqrt(static_cast<double>(n_));
  if (k == 1) return {s, 0.0};
  const Index ix = split(k, n_);
  return s * root_of_unity(static_cast<long>(ix.l) * jpos, n_) * ramp_.v(ix.i, dist);
}

double NBranchBasis::abs2(std::size_t k, double dist) const {
  if (k == 1) return 1.0 / n_;
  const Index ix = split(k, n_);
  return ramp_.v_sq(ix.i, dist) / n_;
}

template <int D>
PatchedBasis<D>::PatchedBasis(std::shared_ptr<const BimoduleContext<D>> ctx,
                              PatchedBasisParams params)
    : ctx_(std::move(ctx)), centers_(ctx_->branch_values) {
  const std::size_t m = centers_.size();
  if (params.radii.empty()) {
    double rho = 0.25 * ctx_->diameter;
    if (m >= 2) {
      double dmin = std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t k = i + 1; k < m; ++k) dmin = std::min(dmin, (centers_[i] - centers_[k]).norm());
      rho = 0.25 * dmin;
    }
    radii_.assign(m, rho);
  } else {
    if (params.radii.size() != m)
      throw ConfigurationError("expected " + std::to_string(m) + " radii, got " +
                               std::to_string(params.radii.size()));
    radii_ = params.radii;
  }
  for (std::size_t i = 0; i < m; ++i) {
    if (!(radii_[i] > 0.0)) throw GeometryError("radius around c_" + std::to_string(i + 1) + " must be positive");
    for (std::size_t k = i + 1; k < m; ++k) {
      const double d = (centers_[i] - centers_[k]).norm();
      if (radii_[i] + radii_[k] >= d)
        throw GeometryError("closed balls around c_" + std::to_string(i + 1) + " and c_" +
                            std::to_string(k + 1) + " intersect (radii " +
                            format_double(radii_[i]) + ", " + format_double(radii_[k]) +
                            ", distance " + format_double(d) + ")");
    }
  }
  if (!(params.P_factor > 0.0 && params.P_factor <= 1.0))
    throw ConfigurationError("P factor must lie in (0, 1]");

  for (std::size_t i = 0; i < m; ++i) {
    const auto groups = ctx_->image_groups(centers_[i]);
    for (std::size_t s = 0; s < groups.size(); ++s)
      families_.push_back({static_cast<int>(i), static_cast<int>(s), groups[s],
                           NBranchBasis(static_cast<int>(groups[s].size()),
                                        params.P_factor * radii_[i])});
  }
  for (std::size_t j = 0; j < ctx_->n(); ++j)
    families_.push_back({static_cast<int>(m), static_cast<int>(j), {static_cast<int>(j)},
                         NBranchBasis(1, 1.0)});
}

template <int D>
double PatchedBasis<D>::distance_to_center(std::size_t patch, const Point& y) const {
  if (patch >= centers_.size()) return 0.0;
  return (y - centers_[patch]).norm();
}

template <int D>
double PatchedBasis<D>::psi(std::size_t patch, const Point& y) const {
  const std::size_t m = centers_.size();
  if (patch < m) {
    const double d = distance_to_center(patch, y);
    const double rho = radii_[patch];
    if (d < rho / 2.0) return 1.0;
    if (d >= rho) return 0.0;
    return 2.0 - 2.0 * d / rho;
  }
  if (patch != m) throw std::out_of_range("patch index");
  // supports are disjoint, so at most one term is nonzero
  double s = 0.0;
  for (std::size_t i = 0; i < m; ++i) s += psi(i, y);
  return 1.0 - s;
}

template <int D>
double PatchedBasis<D>::psi_sum(const Point& y) const {
  double s = 0.0;
  for (std::size_t i = 0; i < patch_count(); ++i) s += psi(i, y);
  return s;
}

template <int D>
std::vector<typename PatchedBasis<D>::Term> PatchedBasis<D>::enumerate(std::size_t count,
                                                                       EnumerationOrder order) const {
  std::vector<Term> out;
  out.reserve(count);
  for (std::size_t k = 1; out.size() < count; ++k) {
    std::vector<int> level;
    for (std::size_t f = 0; f < families_.size(); ++f)
      if (k == 1 || !families_[f].local.finite()) level.push_back(static_cast<int>(f));
    if (level.empty()) break;
    if (order == EnumerationOrder::reversed_within_level) std::reverse(level.begin(), level.end());
    for (int f : level) {
      if (out.size() == count) break;
      out.push_back({f, k});
    }
  }
  return out;
}

template <int D>
std::size_t PatchedBasis<D>::terms_in_levels(std::size_t levels) const {
  if (levels == 0) return 0;
  std::size_t n = 0;
  for (const auto& f : families_) n += f.local.finite() ? 1 : levels;
  return n;
}

template <int D>
Complex PatchedBasis<D>::value(const Term& t, std::size_t j, const Point& y) const {
  const Family& fam = families_[t.family];
  const auto it = std::find(fam.maps.begin(), fam.maps.end(), static_cast<int>(j));
  if (it == fam.maps.end()) return {0.0, 0.0};
  const double p = psi(fam.patch, y);
  if (p == 0.0) return {0.0, 0.0};
  const int pos = static_cast<int>(it - fam.maps.begin()) + 1;
  return std::sqrt(p) * fam.local.value(t.k, pos, distance_to_center(fam.patch, y));
}

template <int D>
double PatchedBasis<D>::abs2(const Term& t, std::size_t j, const Point& y) const {
  const Family& fam = families_[t.family];
  if (std::find(fam.maps.begin(), fam.maps.end(), static_cast<int>(j)) == fam.maps.end()) return 0.0;
  const double p = psi(fam.patch, y);
  if (p == 0.0) return 0.0;
  return p * fam.local.abs2(t.k, distance_to_center(fam.patch, y));
}

template <int D>
BimoduleElement<D, Complex> PatchedBasis<D>::element(const Term& t) const {
  std::vector<typename BimoduleElement<D, Complex>::Fn> comps;
  for (std::size_t j = 0; j < ctx_->n(); ++j)
    comps.push_back([this, t, j](const Point& y) { return value(t, j, y); });
  return BimoduleElement<D, Complex>(ctx_, std::move(comps));
}

template <int D>
std::string PatchedBasis<D>::describe() const {
  std::ostringstream os;
  for (const auto& f : families_) {
    os << "patch " << f.patch + 1 << " sub " << f.sub + 1 << ": maps {";
    for (std::size_t i = 0; i < f.maps.size(); ++i) os << (i ? "," : "") << f.maps[i] + 1;
    os << "} n=" << f.local.n() << "\n";
  }
  return os.str();
}

template <int D>
bool PatchedBasis<D>::saturated_at(const Point& y, std::size_t levels) const {
  for (const auto& f : families_) {
    if (f.local.finite()) continue;
    if (psi(f.patch, y) == 0.0) continue;
    const double d = distance_to_center(f.patch, y);
    if (d == 0.0) continue;
    // terms k <= levels hold ramp levels i <= (levels - 1) / (n - 1)
    const long i = static_cast<long>(levels - 1) / (f.local.n() - 1);
    if (i == 0 || f.local.ramp().r(i, d) != 1.0) return false;
  }
  return true;
}

template class PatchedBasis<1>;
template class PatchedBasis<2>;

template <int D>
ReconstructionResult verify_reconstruction(const PatchedBasis<D>& basis,
                                           const BimoduleElement<D, double>& f, std::size_t M,
                                           const std::vector<VecD<D>>& grid,
                                           EnumerationOrder order) {
  const auto terms = basis.enumerate(M, order);
  const std::size_t T = terms.size();
  const std::size_t N = f.size();
  std::vector<std::vector<double>> per_point(grid.size());
  parallel_for(grid.size(), [&](std::size_t g) {
    const auto& y = grid[g];
    std::vector<double> fv(N);
    for (std::size_t j = 0; j < N; ++j) fv[j] = f.component(j, y);
    std::vector<Complex> partial(N, {0.0, 0.0}), u(N);
    auto& prof = per_point[g];
    prof.resize(T);
    for (std::size_t t = 0; t < T; ++t) {
      Complex coeff{0.0, 0.0};
      for (std::size_t j = 0; j < N; ++j) {
        u[j] = basis.value(terms[t], j, y);
        coeff += std::conj(u[j]) * fv[j];
      }
      double err = 0.0;
      for (std::size_t j = 0; j < N; ++j) {
        partial[j] += u[j] * coeff;
        err = std::max(err, std::abs(partial[j] - fv[j]));
      }
      prof[t] = err;
    }
  });
  ReconstructionResult res;
  res.profile.assign(T, 0.0);
  for (const auto& prof : per_point)
    for (std::size_t t = 0; t < T; ++t) res.profile[t] = std::max(res.profile[t], prof[t]);
  res.sup_error = T ? res.profile.back() : 0.0;
  if (T == 0)
    for (const auto& y : grid)
      for (std::size_t j = 0; j < N; ++j) res.sup_error = std::max(res.sup_error, std::abs(f.component(j, y)));
  res.saturation_index = std::min(T, basis.level_one_size());
  for (std::size_t t = std::max<std::size_t>(res.saturation_index, 1); t < T; ++t)
    if (res.profile[t] > res.profile[t - 1] + 1e-12) res.monotone_after_saturation = false;
  return res;
}

namespace {

// Totals after each level; families are summed separately first so that a
// branch family at its own centre reproduces the collapsed term exactly.
template <int D>
std::vector<double> level_sums(const PatchedBasis<D>& basis, const AlgebraElement<D>& a,
                               std::size_t K_trunc, const VecD<D>& y) {
  const auto& ctx = *basis.context();
  const auto& fams = basis.families();
  std::vector<double> a_img(ctx.n());
  for (std::size_t j = 0; j < ctx.n(); ++j) a_img[j] = a(ctx.image(j, y));
  std::vector<double> fam_sum(fams.size(), 0.0), out(K_trunc, 0.0);
  for (std::size_t k = 1; k <= K_trunc; ++k) {
    for (std::size_t f = 0; f < fams.size(); ++f) {
      if (k > 1 && fams[f].local.finite()) continue;
      const typename PatchedBasis<D>::Term t{static_cast<int>(f), k};
      double level = 0.0;
      for (int j : fams[f].maps) level += basis.abs2(t, static_cast<std::size_t>(j), y) * a_img[j];
      fam_sum[f] += level;
    }
    double total = 0.0;
    for (double s : fam_sum) total += s;
    out[k - 1] = total;
  }
  return out;
}

}  // namespace

template <int D>
double basis_sum_at(const PatchedBasis<D>& basis, const AlgebraElement<D>& a, std::size_t K_trunc,
                    const VecD<D>& y) {
  if (K_trunc == 0) return 0.0;
  return level_sums(basis, a, K_trunc, y).back();
}

template <int D>
std::vector<double> basis_partial_sums(const PatchedBasis<D>& basis, const AlgebraElement<D>& a,
                                       std::size_t K_trunc, const VecD<D>& y) {
  if (K_trunc == 0) return {};
  return level_sums(basis, a, K_trunc, y);
}

template <int D>
SumIdentityResult verify_sum_identity(const PatchedBasis<D>& basis, const AlgebraElement<D>& a,
                                      std::size_t K_trunc, const std::vector<VecD<D>>& grid) {
  const auto ctx = basis.context();
  const TildeFunction<D> at(a, ctx);
  SumIdentityResult res;
  res.level_profile.assign(K_trunc, 0.0);
  std::vector<std::vector<double>> per_point(grid.size());
  parallel_for(grid.size(), [&](std::size_t g) {
    const auto& y = grid[g];
    const double target = at(y);
    auto& prof = per_point[g];
    prof.resize(K_trunc);
    const auto sums = level_sums(basis, a, K_trunc, y);
    for (std::size_t k = 0; k < K_trunc; ++k) prof[k] = std::abs(sums[k] - target);
  });
  for (std::size_t g = 0; g < grid.size(); ++g) {
    const bool on_c = ctx->branch_value_index(grid[g]) >= 0;
    if (on_c) ++res.branch_points_on_grid;
    if (K_trunc && basis.saturated_at(grid[g], K_trunc)) {
      ++res.saturated_points;
      res.saturated_residual = std::max(res.saturated_residual, per_point[g][K_trunc - 1]);
    }
    for (std::size_t k = 0; k < K_trunc; ++k) {
      res.level_profile[k] = std::max(res.level_profile[k], per_point[g][k]);
      if (on_c) res.branch_residual = std::max(res.branch_residual, per_point[g][k]);
    }
  }
  res.max_residual = K_trunc ? res.level_profile.back() : 0.0;
  return res;
}

template <int D>
std::vector<std::pair<std::string, BimoduleElement<D, double>>> standard_elements(
    std::shared_ptr<const BimoduleContext<D>> ctx) {
  const std::size_t N = ctx->n();
  auto dist_c = [ctx](const VecD<D>& y) {
    if (ctx->branch_values.empty()) return ctx->diameter;
    double d = std::numeric_limits<double>::infinity();
    for (const auto& c : ctx->branch_values) d = std::min(d, (y - c).norm());
    return d;
  };
  auto build = [&](std::function<double(const VecD<D>&)> g, std::function<double(const VecD<D>&)> h) {
    std::vector<std::function<double(const VecD<D>&)>> comps;
    for (std::size_t j = 0; j < N; ++j) {
      const double phase = (2.0 * static_cast<double>(j) - static_cast<double>(N - 1)) / N;
      comps.push_back([g, h, phase, dist_c, diam = ctx->diameter](const VecD<D>& y) {
        return g(y) + phase * h(y) * dist_c(y) / diam;
      });
    }
    return BimoduleElement<D, double>(ctx, std::move(comps));
  };
  using F = std::function<double(const VecD<D>&)>;
  const F zero = [](const VecD<D>&) { return 0.0; };
  const F one = [](const VecD<D>&) { return 1.0; };
  std::vector<std::pair<std::string, BimoduleElement<D, double>>> out;
  out.emplace_back("one", build(one, zero));
  out.emplace_back("split", build(zero, one));
  out.emplace_back("affine", build([](const VecD<D>& y) { return 0.5 + 0.25 * y.sum(); }, one));
  out.emplace_back("wave", build([](const VecD<D>& y) { return std::cos(3.0 * y(0)); },
                                 [](const VecD<D>& y) { return 1.5 + std::sin(2.0 * y.sum()); }));
  out.emplace_back("mixed", build([](const VecD<D>& y) { return y(0) * y(0); },
                                  [](const VecD<D>& y) { return 1.0 - y(0); }));
  return out;
}

template <int D>
std::vector<VecD<D>> standard_grid(const Box<D>& box, const BimoduleContext<D>& ctx,
                                   std::size_t per_axis) {
  if (per_axis < 2) throw DomainError("grid needs at least two points per axis");
  const int d = box.dim();
  std::vector<VecD<D>> grid;
  std::size_t total = 1;
  for (int a = 0; a < d; ++a) total *= per_axis;
  grid.reserve(total + ctx.branch_values.size());
  for (std::size_t idx = 0; idx < total; ++idx) {
    VecD<D> p(d);
    std::size_t r = idx;
    for (int a = 0; a < d; ++a) {
      const double s = static_cast<double>(r % per_axis) / static_cast<double>(per_axis - 1);
      p(a) = box.lo(a) + s * (box.hi(a) - box.lo(a));
      r /= per_axis;
    }
    grid.push_back(p);
  }
  for (const auto& c : ctx.branch_values) {
    bool present = false;
    for (const auto& p : grid)
      if ((p - c).norm() <= ctx.tol) {
        present = true;
        break;
      }
    if (!present) grid.push_back(c);
  }
  return grid;
}

#define KMSF_INSTANTIATE(D)                                                                       \
  template ReconstructionResult verify_reconstruction<D>(                                         \
      const PatchedBasis<D>&, const BimoduleElement<D, double>&, std::size_t,                     \
      const std::vector<VecD<D>>&, EnumerationOrder);                                             \
  template SumIdentityResult verify_sum_identity<D>(const PatchedBasis<D>&,                       \
                                                    const AlgebraElement<D>&, std::size_t,        \
                                                    const std::vector<VecD<D>>&);                 \
  template double basis_sum_at<D>(const PatchedBasis<D>&, const AlgebraElement<D>&, std::size_t,  \
                                  const VecD<D>&);                                                \
  template std::vector<double> basis_partial_sums<D>(const PatchedBasis<D>&, const AlgebraElement<D>&, \
                                                     std::size_t, const VecD<D>&);                \
  template std::vector<std::pair<std::string, BimoduleElement<D, double>>> standard_elements<D>( \
      std::shared_ptr<const BimoduleContext<D>>);                                                 \
  template std::vector<VecD<D>> standard_grid<D>(const Box<D>&, const BimoduleContext<D>&,       \
                                                 std::size_t);

KMSF_INSTANTIATE(1)
KMSF_INSTANTIATE(2)

#undef KMSF_INSTANTIATE

}  // namespace kmsf

#include "kmsf/orbit_series.hpp"

#include "kmsf/error.hpp"

namespace kmsf {

OrbitSeries::OrbitSeries(const IfsSystem<Rational, 1>& ifs, const BranchReport<Rational, 1>& report, Rational y,
                         Rational lambda, std::size_t depth)
    : y_(std::move(y)), lambda_(std::move(lambda)), depth_(depth) {
  if (!ifs.all_affine()) throw DomainError("orbit series needs affine maps");
  const Rational N(static_cast<long>(ifs.size()));
  if (!(lambda_ > N)) throw UnboundedSeriesError("lambda <= N: the orbit series is unbounded");
  for (const auto& m : ifs.maps()) {
    alpha_.push_back(m.matrix()(0, 0));
    t_.push_back(m.translation()(0));
  }
  lo_ = Rational(ifs.box().lo(0));
  hi_ = Rational(ifs.box().hi(0));
  for (std::size_t j = 0; j < alpha_.size(); ++j) {
    const Rational a = alpha_[j] * lo_ + t_[j], b = alpha_[j] * hi_ + t_[j];
    if (std::min(a, b) < lo_ || std::max(a, b) > hi_) throw DomainError("map leaves the interval");
  }
  if (!in_domain(y_)) throw DomainError("root outside the interval");
  for (const auto& c : report.branch_values) {
    Collapse col{c(0), {}};
    std::vector<Rational> seen;
    for (std::size_t j = 0; j < alpha_.size(); ++j) {
      const Rational x = alpha_[j] * c(0) + t_[j];
      std::size_t g = 0;
      while (g < seen.size() && seen[g] != x) ++g;
      if (g == seen.size()) {
        seen.push_back(x);
        col.groups.emplace_back();
      }
      col.groups[g].push_back(static_cast<int>(j));
    }
    collapses_.push_back(std::move(col));
  }
}

PiecewisePolynomial OrbitSeries::transfer(const PiecewisePolynomial& a) const {
  PiecewisePolynomial out = a.compose_affine(alpha_[0], t_[0], lo_, hi_);
  for (std::size_t j = 1; j < alpha_.size(); ++j) out = out + a.compose_affine(alpha_[j], t_[j], lo_, hi_);
  return out;
}

std::vector<Rational> OrbitSeries::sums(const PiecewisePolynomial& a) const {
  if (a.lo() != lo_ || a.hi() != hi_) throw DomainError("test function lives on a different interval");
  std::vector<Rational> s;
  s.reserve(depth_ + 2);
  PiecewisePolynomial cur = a;
  for (std::size_t n = 0; n <= depth_ + 1; ++n) {
    s.push_back(cur(y_));
    if (n <= depth_) cur = transfer(cur);
  }
  return s;
}

Rational OrbitSeries::tau(const PiecewisePolynomial& a) const { return identity(a).tau; }

Rational OrbitSeries::tau_tilde(const PiecewisePolynomial& a) const { return identity(a).tau_tilde; }

OrbitSeries::Identity OrbitSeries::identity(const PiecewisePolynomial& a) const {
  const auto s = sums(a);
  const Rational N(static_cast<long>(alpha_.size()));
  const Rational k = (lambda_ - N) / lambda_;
  // doubled-image excess at each reachable branch value
  std::vector<Rational> excess;
  for (const auto& col : collapses_) {
    Rational e = 0;
    for (const auto& g : col.groups) e += Rational(static_cast<long>(g.size() - 1)) * a(alpha_[g[0]] * col.c + t_[g[0]]);
    excess.push_back(e);
  }
  Identity id;
  Rational p = 1;  // lambda^{-n}
  for (std::size_t n = 0; n <= depth_; ++n) {
    Rational corr = 0;
    for (std::size_t i = 0; i < collapses_.size(); ++i) {
      if (excess[i] == 0) continue;
      const Rational cnt = path_count(collapses_[i].c, n);
      if (cnt != 0) corr += cnt * excess[i];
    }
    id.tau += p * s[n];
    id.tau_tilde += p * (s[n + 1] - corr);
    p /= lambda_;
  }
  id.tau *= k;
  id.tau_tilde *= k;
  id.residual = lambda_ * id.tau - id.tau_tilde - (lambda_ - N) * s[0];
  id.literal_residual = lambda_ * id.tau - id.tau_tilde - k * s[0];
  id.tail = -(lambda_ - N) * p * s[depth_ + 1];
  return id;
}

Rational OrbitSeries::defect() const {
  const Rational q = Rational(static_cast<long>(alpha_.size())) / lambda_;
  Rational d = 1;
  for (std::size_t n = 0; n <= depth_; ++n) d *= q;
  return d;
}

Rational OrbitSeries::total_mass() const { return Rational(1) - defect(); }

Rational OrbitSeries::residual_bound(const Rational& sup_abs) const {
  return (lambda_ - Rational(static_cast<long>(alpha_.size()))) * defect() * sup_abs;
}

Rational OrbitSeries::path_count(const Rational& x, std::size_t n) const {
  if (n == 0) return x == y_ ? Rational(1) : Rational(0);
  const auto key = std::make_pair(n, x);
  if (auto it = memo_.find(key); it != memo_.end()) return it->second;
  Rational c = 0;
  for (std::size_t j = 0; j < alpha_.size(); ++j) {
    const Rational z = (x - t_[j]) / alpha_[j];
    if (in_domain(z)) c += path_count(z, n - 1);
  }
  memo_.emplace(key, c);
  return c;
}

Rational OrbitSeries::point_mass(const Rational& x) const {
  const Rational N(static_cast<long>(alpha_.size()));
  Rational s = 0, p = 1;
  for (std::size_t n = 0; n <= depth_; ++n) {
    s += p * path_count(x, n);
    p /= lambda_;
  }
  return (lambda_ - N) / lambda_ * s;
}

}  // namespace kmsf

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "kmsf/basis.hpp"
#include "kmsf/branching.hpp"
#include "kmsf/measure.hpp"
#include "kmsf/presets.hpp"
#include "kmsf/test_functions.hpp"

namespace kmsf {

// ---------------------------------------------------------------- families

// Default test family for a system: the interval family (rescaled when the
// box is not [0,1]) or the planar family.
template <class S, int D>
TestFunctionFamily<D> default_family(const IfsSystem<S, D>& ifs, const BranchReport<S, D>& rep,
                                     std::uint64_t seed = kFamilySeed) {
  if constexpr (D == 1) {
    const double lo = ifs.box().lo(0), hi = ifs.box().hi(0);
    const bool unit = lo == 0.0 && hi == 1.0;
    std::vector<Rational> B;
    for (const auto& x : rep.branch_points) {
      if constexpr (std::is_same_v<S, Rational>) {
        B.push_back(unit ? x(0) : (x(0) - Rational(lo)) / Rational(hi - lo));
      } else {
        B.push_back(Rational((to_double(x(0)) - lo) / (hi - lo)));
      }
    }
    auto fam = interval_family(B, seed);
    if (!unit) {
      for (auto& t : fam.members) {
        t.fn = [f = t.fn, lo, hi](const VecD<1>& y) {
          VecD<1> u;
          u << (y(0) - lo) / (hi - lo);
          return f(u);
        };
        t.exact.reset();
        t.lipschitz /= (hi - lo);
      }
      fam.provenance += "; rescaled from [0,1]";
    }
    return fam;
  } else {
    std::vector<VecD<D>> B;
    for (const auto& x : rep.branch_points) B.push_back(to_double(x));
    return planar_family(ifs.box(), B, seed);
  }
}

// ---------------------------------------------------------------- views

// Floating view of a measure with the images of every atom. Images are
// computed in the measure's own arithmetic; `dup` marks an image equal to an
// earlier one at the same atom, which is what a~ collapses.
template <int D>
struct MeasureView {
  std::size_t n_maps = 0;
  std::vector<VecD<D>> points;
  std::vector<double> weights;
  std::vector<VecD<D>> images;     // images[i * n_maps + j]
  std::vector<std::uint8_t> dup;   // same layout
  double mass_defect = 0.0;
  double resolution = 0.0;
  bool exact = false;

  std::size_t size() const { return points.size(); }
  const VecD<D>& image(std::size_t i, std::size_t j) const { return images[i * n_maps + j]; }
  bool duplicate(std::size_t i, std::size_t j) const { return dup[i * n_maps + j] != 0; }
};

template <class S, int D>
MeasureView<D> make_view(const IfsSystem<S, D>& ifs, const DiscreteMeasure<S, D>& m) {
  MeasureView<D> v;
  const std::size_t n = ifs.size();
  v.n_maps = n;
  v.points.resize(m.size());
  v.weights.resize(m.size());
  v.images.resize(m.size() * n);
  v.dup.assign(m.size() * n, 0);
  v.mass_defect = m.defect_double();
  v.resolution = m.resolution;
  v.exact = is_exact_v<S>;
  const double tol = ifs.collision_tolerance();
  parallel_for(m.size(), [&](std::size_t i) {
    v.points[i] = to_double(m.points[i]);
    v.weights[i] = weight_to_double(m.weights[i]);
    std::vector<Vec<S, D>> img;
    img.reserve(n);
    for (std::size_t j = 0; j < n; ++j) {
      img.push_back(ifs.maps()[j](m.points[i]));
      v.images[i * n + j] = to_double(img.back());
      for (std::size_t k = 0; k < j; ++k)
        if (point_equal<S, D>(img[k], img[j], tol)) {
          v.dup[i * n + j] = 1;
          break;
        }
    }
  });
  return v;
}

// tau(a), sum_j tau(a o gamma_j) and tau(a~) for one member
struct MemberIntegrals {
  double tau = 0.0;
  double tau_push = 0.0;
  double tau_tilde = 0.0;
};

template <int D, class F>
MemberIntegrals member_integrals(const MeasureView<D>& v, F&& a) {
  const std::size_t m = v.size();
  std::vector<double> t(m), p(m), q(m);
  for (std::size_t i = 0; i < m; ++i) {
    const double w = v.weights[i];
    double push = 0.0, tilde = 0.0;
    for (std::size_t j = 0; j < v.n_maps; ++j) {
      const double x = a(v.image(i, j));
      push += x;
      if (!v.duplicate(i, j)) tilde += x;
    }
    t[i] = w * a(v.points[i]);
    p[i] = w * push;
    q[i] = w * tilde;
  }
  return {pairwise_sum(t.data(), m), pairwise_sum(p.data(), m), pairwise_sum(q.data(), m)};
}

// ---------------------------------------------------------------- verdicts

// bound = base + kappa (mass_defect sup|a| + resolution Lip(a)),
// kappa = max(10, lambda + N); base 1e-12 for exact atoms, 1e-7 otherwise.
struct VerdictPolicy {
  double base_exact = 1e-12;
  double base_float = 1e-7;

  double kappa(double lambda, std::size_t n_maps) const {
    return std::max(10.0, lambda + static_cast<double>(n_maps));
  }
  template <int D>
  double bound(const MeasureView<D>& v, const TestFunction<D>& a, double lambda) const {
    return (v.exact ? base_exact : base_float) +
           kappa(lambda, v.n_maps) * (v.mass_defect * a.sup_bound + v.resolution * a.lipschitz);
  }
};

struct MemberCheck {
  std::string name;
  double value = 0.0;  // residual (conditions 3, identity) or margin (condition 4)
  double bound = 0.0;
  bool pass = true;
};

struct ConditionReport {
  std::string condition;  // "condition3" | "condition4" | "orbit_identity"
  double lambda = 0.0;
  std::vector<MemberCheck> members;
  double worst = 0.0;  // max |residual|, or min margin
  std::string worst_member;
  bool pass = true;
  // orbit identity only: max |residual| of the literal coefficient (lambda-N)/lambda
  std::optional<double> literal_discrepancy;
};

template <int D>
using Family = std::vector<const TestFunction<D>*>;

namespace detail {

template <int D, class Fn>
ConditionReport run_members(const std::string& name, double lambda, const Family<D>& family, bool margin,
                            Fn&& eval) {
  if (family.empty()) throw ConfigurationError(name + ": empty test family");
  ConditionReport r;
  r.condition = name;
  r.lambda = lambda;
  r.members.resize(family.size());
  parallel_for(family.size(), [&](std::size_t k) { r.members[k] = eval(*family[k]); });
  r.worst = margin ? std::numeric_limits<double>::infinity() : 0.0;
  for (const auto& m : r.members) {
    const bool worse = margin ? m.value < r.worst : std::abs(m.value) > r.worst;
    if (worse || r.worst_member.empty()) {
      if (worse) r.worst = margin ? m.value : std::abs(m.value);
      if (worse || r.worst_member.empty()) r.worst_member = m.name;
    }
    r.pass = r.pass && m.pass;
  }
  return r;
}

}  // namespace detail

// sum_j tau(gamma_j^* a) - lambda tau(a) over members vanishing on B.
template <int D>
ConditionReport check_condition3(const MeasureView<D>& v, double lambda, const Family<D>& family,
                                 const VerdictPolicy& pol = {}) {
  return detail::run_members<D>("condition3", lambda, family, false, [&](const TestFunction<D>& a) {
    const auto in = member_integrals(v, a.fn);
    MemberCheck c{a.name, in.tau_push - lambda * in.tau, pol.bound(v, a, lambda)};
    c.pass = std::abs(c.value) <= c.bound;
    return c;
  });
}

// lambda tau(a) - tau(a~) >= -bound over positive members.
template <int D>
ConditionReport check_condition4(const MeasureView<D>& v, double lambda, const Family<D>& family,
                                 const VerdictPolicy& pol = {}) {
  return detail::run_members<D>("condition4", lambda, family, true, [&](const TestFunction<D>& a) {
    const auto in = member_integrals(v, a.fn);
    MemberCheck c{a.name, lambda * in.tau - in.tau_tilde, pol.bound(v, a, lambda)};
    c.pass = c.value >= -c.bound;
    return c;
  });
}

// lambda tau(a) - tau(a~) - (lambda - N) a(y) on an orbit measure; the
// truncated tail is bounded by (lambda - N) defect sup|a|.
template <int D>
ConditionReport check_orbit_identity(const MeasureView<D>& v, double lambda, const VecD<D>& root,
                                     const Family<D>& family, const VerdictPolicy& pol = {}) {
  const double N = static_cast<double>(v.n_maps);
  std::vector<double> literal(family.size(), 0.0);
  std::vector<const TestFunction<D>*> index(family);
  auto r = detail::run_members<D>("orbit_identity", lambda, family, false, [&](const TestFunction<D>& a) {
    const auto in = member_integrals(v, a.fn);
    const double ay = a.fn(root);
    MemberCheck c{a.name, lambda * in.tau - in.tau_tilde - (lambda - N) * ay, pol.bound(v, a, lambda)};
    c.pass = std::abs(c.value) <= c.bound;
    const auto k = static_cast<std::size_t>(std::find(index.begin(), index.end(), &a) - index.begin());
    literal[k] = std::abs(lambda * in.tau - in.tau_tilde - (lambda - N) / lambda * ay);
    return c;
  });
  r.literal_discrepancy = *std::max_element(literal.begin(), literal.end());
  return r;
}

// ---------------------------------------------------------------- basis conditions

struct BasisMemberCheck {
  std::string name;
  bool equality = true;        // I_X member (condition 1) or positive member (condition 2)
  double basis_integral = 0.0; // integral of the K_trunc-level partial sum
  double lambda_tau = 0.0;
  double tilde_integral = 0.0;  // tau(a~), the condition 3/4 quantity
  double saturated_gap = 0.0;   // |basis - a~| integrated over saturated atoms
  double unsaturated_mass = 0.0;
  double bound = 0.0;
  bool monotone = true;  // integrals at K/4, K/2, K nondecreasing (positive members)
  bool pass = true;
};

struct BasisConditionReport {
  std::size_t K_trunc = 0;
  double lambda = 0.0;
  std::vector<BasisMemberCheck> members;
  double max_equality_residual = 0.0;
  double max_saturated_gap = 0.0;
  bool pass = true;
};

// sum_{k <= K_trunc} tau((u_k | a u_k)_A) against lambda tau(a): equality on
// vanishing members, <= on positive ones. Atoms where a ramp has not yet
// saturated contribute at most 2 N sup|a| each to the gap from tau(a~).
template <int D>
BasisConditionReport check_basis_conditions(const MeasureView<D>& v, double lambda, const PatchedBasis<D>& basis,
                                            const Family<D>& vanishing, const Family<D>& positive,
                                            std::size_t K_trunc, const VerdictPolicy& pol = {}) {
  if (K_trunc == 0) throw ConfigurationError("K_trunc must be >= 1");
  if (vanishing.empty() && positive.empty()) throw ConfigurationError("basis check: empty test family");
  const auto& fams = basis.families();
  const std::size_t n = v.n_maps;
  std::vector<std::size_t> marks{std::max<std::size_t>(1, K_trunc / 4), std::max<std::size_t>(1, K_trunc / 2),
                                 K_trunc};
  marks.erase(std::unique(marks.begin(), marks.end()), marks.end());
  // G[i][c * n + j] = sum over levels <= marks[c] and families of |u_{k,j}(p_i)|^2
  std::vector<std::vector<double>> G(v.size());
  std::vector<std::uint8_t> saturated(v.size());
  parallel_for(v.size(), [&](std::size_t i) {
    const auto& p = v.points[i];
    std::vector<double> acc(n, 0.0);
    auto& g = G[i];
    g.assign(marks.size() * n, 0.0);
    std::size_t c = 0;
    for (std::size_t k = 1; k <= K_trunc; ++k) {
      for (std::size_t f = 0; f < fams.size(); ++f) {
        if (k > 1 && fams[f].local.finite()) continue;
        const typename PatchedBasis<D>::Term t{static_cast<int>(f), k};
        for (int j : fams[f].maps) acc[j] += basis.abs2(t, static_cast<std::size_t>(j), p);
      }
      if (k == marks[c]) {
        std::copy(acc.begin(), acc.end(), g.begin() + static_cast<long>(c * n));
        ++c;
      }
    }
    saturated[i] = basis.saturated_at(p, K_trunc) ? 1 : 0;
  });
  double unsat = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i)
    if (!saturated[i]) unsat += v.weights[i];

  BasisConditionReport rep;
  rep.K_trunc = K_trunc;
  rep.lambda = lambda;
  auto eval = [&](const TestFunction<D>& a, bool equality) {
    BasisMemberCheck m;
    m.name = a.name;
    m.equality = equality;
    m.unsaturated_mass = unsat;
    const auto in = member_integrals(v, a.fn);
    m.lambda_tau = lambda * in.tau;
    m.tilde_integral = in.tau_tilde;
    std::vector<double> per_mark(marks.size(), 0.0);
    double gap = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
      double tilde = 0.0;
      std::vector<double> ai(n);
      for (std::size_t j = 0; j < n; ++j) {
        ai[j] = a.fn(v.image(i, j));
        if (!v.duplicate(i, j)) tilde += ai[j];
      }
      for (std::size_t c = 0; c < marks.size(); ++c) {
        double s = 0.0;
        for (std::size_t j = 0; j < n; ++j) s += G[i][c * n + j] * ai[j];
        per_mark[c] += v.weights[i] * s;
        if (c + 1 == marks.size() && saturated[i]) gap += v.weights[i] * (s - tilde);
      }
    }
    m.basis_integral = per_mark.back();
    m.saturated_gap = std::abs(gap);
    const double cond = pol.bound(v, a, lambda);
    m.bound = cond + 1e-9 + 2.0 * static_cast<double>(n) * a.sup_bound * unsat;
    if (equality) {
      m.pass = std::abs(m.basis_integral - m.lambda_tau) <= m.bound;
    } else {
      for (std::size_t c = 1; c < marks.size(); ++c) m.monotone = m.monotone && per_mark[c] >= per_mark[c - 1] - 1e-12;
      m.pass = m.monotone && m.basis_integral <= m.lambda_tau + cond + 1e-9;
    }
    return m;
  };
  rep.members.resize(vanishing.size() + positive.size());
  parallel_for(rep.members.size(), [&](std::size_t k) {
    rep.members[k] = k < vanishing.size() ? eval(*vanishing[k], true) : eval(*positive[k - vanishing.size()], false);
  });
  for (const auto& m : rep.members) {
    if (m.equality) rep.max_equality_residual = std::max(rep.max_equality_residual, std::abs(m.basis_integral - m.lambda_tau));
    rep.max_saturated_gap = std::max(rep.max_saturated_gap, m.saturated_gap);
    rep.pass = rep.pass && m.pass;
  }
  return rep;
}

// ---------------------------------------------------------------- classification

struct SnappedLambda {
  Rational value;
  bool snapped = false;  // nearest small-denominator rational was used
};

// lambda = e^beta as a rational: the nearest fraction with denominator
// <= 10^6 when within 1e-9 relative, otherwise the exact value of the double.
inline SnappedLambda snap_lambda(double lambda) {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) throw DomainError("lambda must be positive and finite");
  long long h0 = 0, h1 = 1, k0 = 1, k1 = 0;
  double x = lambda;
  std::optional<Rational> best;
  for (int it = 0; it < 64; ++it) {
    const double a = std::floor(x);
    if (a > 9e15) break;
    const long long ai = static_cast<long long>(a);
    const long long h2 = ai * h1 + h0, k2 = ai * k1 + k0;
    if (k2 > 1000000) break;
    h0 = h1;
    h1 = h2;
    k0 = k1;
    k1 = k2;
    const double approx = static_cast<double>(h1) / static_cast<double>(k1);
    if (std::abs(approx - lambda) <= 1e-9 * lambda) {
      best = Rational(h1, k1);
      break;
    }
    if (x - a < 1e-300) break;
    x = 1.0 / (x - a);
  }
  if (best) return {*best, true};
  return {Rational(lambda), false};
}

inline std::size_t depth_within_budget(std::size_t n_maps, std::size_t budget) {
  std::size_t total = 1, level = 1, d = 0;
  while (true) {
    level *= n_maps;
    if (total + level > budget) return d;
    total += level;
    ++d;
  }
}

enum class Regime { empty, hutchinson, simplex };

inline const char* regime_name(Regime r) {
  switch (r) {
    case Regime::empty: return "empty";
    case Regime::hutchinson: return "hutchinson";
    case Regime::simplex: return "simplex";
  }
  return "?";
}

struct CandidateVerdict {
  std::string label;
  ConditionReport condition3;
  ConditionReport condition4;
  std::optional<ConditionReport> identity;
  bool pass = true;
};

struct ClassifyParams {
  double target_defect = 1e-9;
  std::size_t vertex_budget = std::size_t{1} << 17;
  std::size_t hutchinson_budget = std::size_t{1} << 16;  // atoms; steps = floor(log_N budget)
  double merge_resolution = 0.0;                          // 0: diam(box) 2^-20
  std::uint64_t family_seed = kFamilySeed;
  bool run_checks = true;
};

template <class S, int D>
struct Classification {
  double beta = 0.0;
  SnappedLambda lambda;
  std::size_t n_maps = 0;
  Regime regime = Regime::empty;
  std::string reason;
  bool verified_class = false;  // interval with OSC, or the gasket
  std::vector<KmsCandidate<S, D>> vertices;
  std::vector<std::string> vertex_names;
  std::optional<KmsCandidate<double, D>> hutchinson;
  std::size_t hutchinson_steps = 0;
  std::vector<CandidateVerdict> verdicts;

  bool all_pass() const {
    for (const auto& v : verdicts)
      if (!v.pass) return false;
    return true;
  }
};

// Interval systems satisfying the sampled open set condition on the open box,
// and the exact gasket, are the classes with a proved classification.
template <class S, int D>
bool hypotheses_verified(const IfsSystem<S, D>& ifs) {
  if constexpr (D == 1) {
    if (!ifs.all_affine()) return false;
    const S lo = from_double<S>(ifs.box().lo(0)), hi = from_double<S>(ifs.box().hi(0));
    return check_open_set_condition(ifs, open_interval<S>(lo, hi), 4096).pass;
  } else if constexpr (std::is_same_v<S, QSqrt3> && D == 2) {
    const auto g = sierpinski();
    if (g.ifs.size() != ifs.size() || !ifs.all_affine()) return false;
    for (std::size_t j = 0; j < ifs.size(); ++j)
      if (g.ifs.maps()[j].matrix() != ifs.maps()[j].matrix() ||
          g.ifs.maps()[j].translation() != ifs.maps()[j].translation())
        return false;
    return true;
  } else {
    return false;
  }
}

// Verification suite on one candidate.
template <class S, int D>
CandidateVerdict verify_candidate(const IfsSystem<S, D>& ifs, const KmsCandidate<S, D>& c,
                                  const TestFunctionFamily<D>& family, const VerdictPolicy& pol = {}) {
  CandidateVerdict v;
  v.label = c.label;
  const auto view = make_view(ifs, c.measure);
  const double lambda = weight_to_double(c.lambda);
  v.condition3 = check_condition3(view, lambda, family.vanishing(), pol);
  v.condition4 = check_condition4(view, lambda, family.positive(), pol);
  v.pass = v.condition3.pass && v.condition4.pass;
  if (c.kind == CandidateKind::orbit && c.root) {
    v.identity = check_orbit_identity(view, lambda, to_double(*c.root), family.all(), pol);
    v.pass = v.pass && v.identity->pass;
  }
  return v;
}

template <class S, int D>
Classification<S, D> classify(const IfsSystem<S, D>& ifs, const BranchReport<S, D>& rep, double beta,
                              const ClassifyParams& params = {}) {
  if (!(beta > 0.0) || !std::isfinite(beta)) throw DomainError("beta must be positive");
  using W = weight_t<S>;
  Classification<S, D> out;
  out.beta = beta;
  out.lambda = snap_lambda(std::exp(beta));
  out.n_maps = ifs.size();
  out.verified_class = hypotheses_verified(ifs);
  const Rational N(static_cast<long>(ifs.size()));
  const Rational& lam = out.lambda.value;

  std::optional<TestFunctionFamily<D>> family;
  if (params.run_checks) family = default_family(ifs, rep, params.family_seed);

  if (lam < N) {
    out.regime = Regime::empty;
    out.reason = "lambda >= N required: KMS states exist only if lambda = e^beta >= N (here lambda = " +
                 format_double(lam.convert_to<double>()) + " < N = " + std::to_string(ifs.size()) + ")";
    return out;
  }
  if (lam == N) {
    out.regime = Regime::hutchinson;
    out.reason = "lambda = N: the Hutchinson measure gives the unique KMS state";
    const auto fifs = ifs.template cast<double>();
    std::size_t steps = 0, atoms = 1;
    while (atoms * ifs.size() <= params.hutchinson_budget) {
      atoms *= ifs.size();
      ++steps;
    }
    steps = std::max<std::size_t>(steps, 1);
    const double res = params.merge_resolution > 0.0 ? params.merge_resolution
                                                     : ifs.box().diameter() * std::ldexp(1.0, -20);
    // natural seed: centre of the box for non-presets
    VecD<D> seed = ifs.box().center();
    auto run = hutchinson_iterate(fifs, dirac<double, D>(seed), steps, res);
    KmsCandidate<double, D> h;
    h.lambda = static_cast<double>(ifs.size());
    h.beta = beta;
    h.kind = CandidateKind::hutchinson;
    h.label = "hutchinson";
    h.depth = steps;
    h.measure = std::move(run.measure);
    out.hutchinson_steps = steps;
    if (family) {
      CandidateVerdict v;
      v.label = h.label;
      const auto view = make_view(fifs, h.measure);
      // the Hutchinson measure satisfies (3) on the whole algebra
      v.condition3 = check_condition3(view, h.lambda, family->all());
      v.condition4 = check_condition4(view, h.lambda, family->positive());
      v.pass = v.condition3.pass && v.condition4.pass;
      out.verdicts.push_back(std::move(v));
    }
    out.hutchinson = std::move(h);
    return out;
  }
  if (rep.branch_points.empty()) {
    out.regime = Regime::empty;
    out.reason = "lambda > N but B is empty: no branch points, so no orbit-measure vertices";
    return out;
  }
  out.regime = Regime::simplex;
  out.reason = "lambda > N: convex combinations of the orbit measures mu_{y,lambda}, y in B";
  W lambda_w;
  if constexpr (is_exact_v<S>) {
    lambda_w = lam;
  } else {
    lambda_w = lam.template convert_to<double>();
  }
  const std::size_t want = depth_for_defect(ifs.size(), lam.convert_to<double>(), params.target_defect);
  const std::size_t depth = std::min(want, depth_within_budget(ifs.size(), params.vertex_budget));
  for (std::size_t i = 0; i < rep.branch_points.size(); ++i) {
    auto c = orbit_measure(ifs, rep, rep.branch_points[i], lambda_w, depth);
    c.beta = beta;
    c.label = "b_" + std::to_string(i + 1);
    out.vertex_names.push_back(c.label);
    if (family) out.verdicts.push_back(verify_candidate(ifs, c, *family));
    out.vertices.push_back(std::move(c));
  }
  return out;
}

// ---------------------------------------------------------------- decomposition

template <class S, int D>
struct Decomposition {
  using W = weight_t<S>;
  std::vector<Vec<S, D>> roots;
  std::vector<W> point_masses;  // c_mu(y)
  std::vector<W> weights;       // lambda/(lambda-N) c_mu(y)
  W residual_tv = W(0);         // total variation of mu - sum_y w_y mu_{y,lambda}
  W defect_budget = W(0);
  W mass_gap = W(0);  // sum_y c_mu(y) - (lambda-N)/lambda
  double tolerance = 0.0;
  bool precondition_pass = true;
  std::optional<ConditionReport> condition3, condition4;
  bool pass = false;
};

template <class S, int D>
Decomposition<S, D> decompose(const IfsSystem<S, D>& ifs, const BranchReport<S, D>& rep,
                              const DiscreteMeasure<S, D>& mu, const weight_t<S>& lambda, std::size_t depth,
                              const TestFunctionFamily<D>* family = nullptr, double tolerance = 1e-12) {
  using W = weight_t<S>;
  const W N = W(static_cast<long>(ifs.size()));
  if (!(lambda > N)) throw DomainError("decompose needs lambda > N");
  Decomposition<S, D> d;
  d.tolerance = tolerance;
  if (family) {
    const auto view = make_view(ifs, mu);
    const double l = weight_to_double(lambda);
    d.condition3 = check_condition3(view, l, family->vanishing());
    d.condition4 = check_condition4(view, l, family->positive());
    d.precondition_pass = d.condition3->pass && d.condition4->pass;
    if (!d.precondition_pass) return d;
  }
  const double radius = is_exact_v<S> ? 0.0 : ifs.collision_tolerance();
  PointSet<S, D> set(radius);
  std::vector<W> acc;
  auto add = [&](const Vec<S, D>& p, const W& w) {
    auto [id, inserted] = set.insert(p);
    if (inserted) acc.push_back(w);
    else acc[id] += w;
  };
  for (std::size_t i = 0; i < mu.size(); ++i) add(mu.points[i], mu.weights[i]);
  d.defect_budget = mu.mass_defect;
  W csum = W(0);
  for (const auto& y : rep.branch_points) {
    const W c = point_mass(mu, y, radius);
    const W w = lambda / (lambda - N) * c;
    d.roots.push_back(y);
    d.point_masses.push_back(c);
    d.weights.push_back(w);
    csum += c;
    if (w == W(0)) continue;
    const auto v = orbit_measure(ifs, rep, y, lambda, depth);
    for (std::size_t i = 0; i < v.measure.size(); ++i) add(v.measure.points[i], -(w * v.measure.weights[i]));
    d.defect_budget += w * v.measure.mass_defect;
  }
  for (const auto& a : acc) d.residual_tv += a < W(0) ? W(-a) : a;
  d.mass_gap = csum - (lambda - N) / lambda;
  const double gap = std::abs(weight_to_double(d.mass_gap));
  const double budget = tolerance + weight_to_double(d.defect_budget);
  d.pass = weight_to_double(d.residual_tv) <= budget && gap <= budget;
  return d;
}

// ---------------------------------------------------------------- entropy link

struct MinBeta {
  double beta = 0.0;  // log N
  std::size_t n_maps = 0;
  std::string interpretation;
};

template <class S, int D>
MinBeta min_beta(const IfsSystem<S, D>& ifs) {
  MinBeta m;
  m.n_maps = ifs.size();
  m.beta = std::log(static_cast<double>(ifs.size()));
  m.interpretation = "minimum inverse temperature log N equals the entropy h(gamma^{-1}) = log " +
                     std::to_string(ifs.size()) + " of the inverse branches";
  return m;
}

}  // namespace kmsf

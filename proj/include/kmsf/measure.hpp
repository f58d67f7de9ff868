#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "kmsf/branching.hpp"
#include "kmsf/error.hpp"
#include "kmsf/ifs.hpp"
#include "kmsf/parallel.hpp"
#include "kmsf/point_set.hpp"

namespace kmsf {

// Finite atomic measure. Exact scalars carry rational weights and are never
// merged; floating measures merge atoms closer than a resolution.
template <class S, int D>
struct DiscreteMeasure {
  using Point = Vec<S, D>;
  using W = weight_t<S>;

  std::vector<Point> points;
  std::vector<W> weights;
  std::vector<std::string> labels;  // optional, e.g. generating word
  W mass_defect = W(0);             // unrepresented mass (certified)
  double resolution = 0.0;          // spatial defect of the atoms

  std::size_t size() const { return points.size(); }
  static constexpr bool exact() { return is_exact_v<S>; }

  W total() const {
    W s = W(0);
    for (const auto& w : weights) s += w;
    return s;
  }
  double total_double() const { return weight_to_double(total()); }
  double defect_double() const { return weight_to_double(mass_defect); }

  double max_weight() const {
    double m = 0.0;
    for (const auto& w : weights) m = std::max(m, weight_to_double(w));
    return m;
  }

  void add(const Point& p, W w, std::string label = {}) {
    if (w < W(0)) throw DomainError("negative atom weight");
    points.push_back(p);
    weights.push_back(std::move(w));
    if (!label.empty() || !labels.empty()) {
      labels.resize(points.size() - 1);
      labels.push_back(std::move(label));
    }
  }
};

template <class S, int D>
DiscreteMeasure<S, D> dirac(const Vec<S, D>& x) {
  DiscreteMeasure<S, D> m;
  m.add(x, weight_t<S>(1));
  return m;
}

// Merge coincident atoms (exact equality, or within `tol` for doubles).
template <class S, int D>
DiscreteMeasure<S, D> merge_atoms(const DiscreteMeasure<S, D>& m, double tol) {
  PointSet<S, D> set(tol);
  DiscreteMeasure<S, D> out;
  out.mass_defect = m.mass_defect;
  out.resolution = m.resolution + (is_exact_v<S> ? 0.0 : tol);
  const bool labelled = !m.labels.empty();
  for (std::size_t i = 0; i < m.size(); ++i) {
    auto [id, inserted] = set.insert(m.points[i]);
    if (inserted) {
      out.points.push_back(set[id]);
      out.weights.push_back(m.weights[i]);
      if (labelled) out.labels.push_back(m.labels[i]);
    } else {
      out.weights[id] += m.weights[i];
    }
  }
  return out;
}

// gamma# m
template <class S, int D>
DiscreteMeasure<S, D> pushforward(const DiscreteMeasure<S, D>& m, const ContractionMap<S, D>& g) {
  DiscreteMeasure<S, D> out = m;
  for (auto& p : out.points) p = g(p);
  return out;
}

struct W1Result {
  double value = 0.0;
  double spread = 0.0;  // sliced estimate only
  bool exact = true;    // 1D exact CDF computation
  int directions = 0;
};

namespace detail {

// W1 between two normalised 1D atom lists via the CDF difference.
inline double w1_1d(std::vector<std::pair<double, double>> a, std::vector<std::pair<double, double>> b) {
  double ta = 0.0, tb = 0.0;
  for (const auto& [x, w] : a) ta += w;
  for (const auto& [x, w] : b) tb += w;
  std::vector<std::pair<double, double>> ev;
  ev.reserve(a.size() + b.size());
  for (const auto& [x, w] : a) ev.emplace_back(x, w / ta);
  for (const auto& [x, w] : b) ev.emplace_back(x, -w / tb);
  std::sort(ev.begin(), ev.end(), [](const auto& u, const auto& v) {
    return u.first < v.first || (u.first == v.first && u.second < v.second);
  });
  double diff = 0.0, acc = 0.0;
  for (std::size_t i = 0; i + 1 < ev.size(); ++i) {
    diff += ev[i].second;
    acc += std::abs(diff) * (ev[i + 1].first - ev[i].first);
  }
  return acc;
}

template <class S, int D>
std::vector<std::pair<double, double>> projected(const DiscreteMeasure<S, D>& m, const VecD<D>& dir) {
  std::vector<std::pair<double, double>> out;
  out.reserve(m.size());
  for (std::size_t i = 0; i < m.size(); ++i)
    out.emplace_back(to_double(m.points[i]).dot(dir), weight_to_double(m.weights[i]));
  return out;
}

}  // namespace detail

inline constexpr int kSlicedDirections = 64;

// W1 between the normalised measures. Exact in dimension 1; sliced over 64
// fixed directions in dimension 2.
template <class S1, class S2, int D>
W1Result w1_distance(const DiscreteMeasure<S1, D>& a, const DiscreteMeasure<S2, D>& b) {
  if (a.size() == 0 || b.size() == 0) throw DomainError("W1 of an empty measure");
  const double ta = a.total_double(), tb = b.total_double();
  if (std::abs(ta - tb) > a.defect_double() + b.defect_double() + 1e-9)
    throw NormalizationError("masses " + format_double(ta) + " and " + format_double(tb) +
                             " differ beyond the defects");
  const int dim = static_cast<int>(a.points.front().size());
  W1Result r;
  if (dim == 1) {
    VecD<D> e(1);
    e << 1.0;
    r.value = detail::w1_1d(detail::projected(a, e), detail::projected(b, e));
    return r;
  }
  if (dim != 2) throw ShapeError("sliced W1 implemented for dimension 2");
  r.exact = false;
  r.directions = kSlicedDirections;
  std::vector<double> vals(kSlicedDirections);
  parallel_for(kSlicedDirections, [&](std::size_t k) {
    const double th = std::numbers::pi * (static_cast<double>(k) + 0.5) / kSlicedDirections;
    VecD<D> e(2);
    e << std::cos(th), std::sin(th);
    vals[k] = detail::w1_1d(detail::projected(a, e), detail::projected(b, e));
  });
  double mean = 0.0;
  for (double v : vals) mean += v;
  mean /= kSlicedDirections;
  double var = 0.0;
  for (double v : vals) var += (v - mean) * (v - mean);
  r.value = mean;
  r.spread = std::sqrt(var / (kSlicedDirections - 1) / kSlicedDirections);
  return r;
}

// Exact W1 between the normalised 1D measure and uniform measure on [lo, hi].
template <class S>
double w1_to_lebesgue(const DiscreteMeasure<S, 1>& m, double lo = 0.0, double hi = 1.0) {
  std::vector<std::pair<double, double>> at;
  double total = 0.0;
  for (std::size_t i = 0; i < m.size(); ++i) {
    const double x = to_double(m.points[i](0));
    if (x < lo || x > hi) throw DomainError("atom outside the reference interval");
    const double w = weight_to_double(m.weights[i]);
    at.emplace_back(x, w);
    total += w;
  }
  std::sort(at.begin(), at.end());
  const double L = hi - lo;
  // integral over u in [ga, gb] of |c - u|
  auto piece = [](double c, double ga, double gb) {
    if (c <= ga) return ((gb - c) * (gb - c) - (ga - c) * (ga - c)) / 2.0;
    if (c >= gb) return ((c - ga) * (c - ga) - (c - gb) * (c - gb)) / 2.0;
    return ((c - ga) * (c - ga) + (gb - c) * (gb - c)) / 2.0;
  };
  double F = 0.0, prev = lo, acc = 0.0;
  for (const auto& [x, w] : at) {
    acc += piece(F, (prev - lo) / L, (x - lo) / L) * L;
    F += w / total;
    prev = x;
  }
  acc += piece(F, (prev - lo) / L, 1.0) * L;
  return acc;
}

struct HutchinsonStep {
  std::size_t step = 0;
  std::size_t atoms = 0;
  double w1_to_previous = 0.0;
};

template <class S, int D>
struct HutchinsonRun {
  DiscreteMeasure<S, D> measure;
  std::vector<HutchinsonStep> history;
  double contraction_bound = 0.0;  // c2_max
  bool geometric = true;           // consecutive W1 ratios <= contraction bound (+ slack)
};

// m <- (1/N) sum_j gamma_j# m, merging atoms within merge_resolution.
template <class S, int D>
HutchinsonRun<S, D> hutchinson_iterate(const IfsSystem<S, D>& ifs, const DiscreteMeasure<S, D>& init,
                                       std::size_t steps, double merge_resolution,
                                       std::size_t budget = kDefaultAtomBudget) {
  if (steps < 1) throw DomainError("hutchinson_iterate needs steps >= 1");
  const double total = init.total_double();
  if (std::abs(total - 1.0) > init.defect_double() + 1e-12)
    throw NormalizationError("initial measure is not a probability measure");
  using W = weight_t<S>;
  const W inv_n = W(1) / W(static_cast<long>(ifs.size()));
  HutchinsonRun<S, D> run;
  run.contraction_bound = ifs.c2_max();
  DiscreteMeasure<S, D> cur = init;
  // resolution tracks a certified W1 bound to the fixed point: diam(box) for
  // the seed, times c2 per step, plus each merge radius
  cur.resolution = ifs.box().diameter();
  const double c2 = ifs.c2_max();
  const double tol = is_exact_v<S> ? 0.0 : merge_resolution;
  for (std::size_t s = 1; s <= steps; ++s) {
    if (cur.size() > budget / ifs.size())
      throw BudgetError("Hutchinson step " + std::to_string(s) + " needs " +
                        std::to_string(cur.size() * ifs.size()) + " atoms before merging (budget " +
                        std::to_string(budget) + "); use chaos_game instead");
    DiscreteMeasure<S, D> next;
    next.points.resize(cur.size() * ifs.size());
    next.weights.resize(cur.size() * ifs.size());
    parallel_for(ifs.size(), [&](std::size_t j) {
      const auto& g = ifs.maps()[j];
      for (std::size_t i = 0; i < cur.size(); ++i) {
        next.points[j * cur.size() + i] = g(cur.points[i]);
        next.weights[j * cur.size() + i] = cur.weights[i] * inv_n;
      }
    });
    next.mass_defect = cur.mass_defect;
    next.resolution = cur.resolution * c2;
    next = merge_atoms(next, tol);
    HutchinsonStep h{s, next.size(), w1_distance(cur, next).value};
    if (!run.history.empty()) {
      const double prev = run.history.back().w1_to_previous;
      if (h.w1_to_previous > c2 * prev + 2.0 * merge_resolution + 1e-15) run.geometric = false;
    }
    run.history.push_back(h);
    cur = std::move(next);
  }
  run.measure = std::move(cur);
  return run;
}

// Random orbit with uniform map choice; atoms after burn_in, equal weights.
template <class S, int D>
DiscreteMeasure<S, D> chaos_game(const IfsSystem<S, D>& ifs, std::size_t steps, std::size_t burn_in,
                                 std::uint64_t seed, const Vec<S, D>& start) {
  if (steps <= burn_in) throw DomainError("chaos_game needs steps > burn_in");
  std::mt19937_64 rng(seed);
  DiscreteMeasure<S, D> m;
  const std::size_t kept = steps - burn_in;
  m.points.reserve(kept);
  m.weights.assign(kept, weight_t<S>(1) / weight_t<S>(static_cast<long>(kept)));
  Vec<S, D> p = start;
  for (std::size_t s = 0; s < steps; ++s) {
    p = ifs.maps()[rng() % ifs.size()](p);
    if (s >= burn_in) m.points.push_back(p);
  }
  m.resolution = ifs.box().diameter() * std::pow(ifs.c2_max(), static_cast<double>(burn_in));
  return m;
}

enum class CandidateKind { hutchinson, orbit, mixture };

inline const char* kind_name(CandidateKind k) {
  switch (k) {
    case CandidateKind::hutchinson: return "hutchinson";
    case CandidateKind::orbit: return "orbit";
    case CandidateKind::mixture: return "mixture";
  }
  return "?";
}

template <class S, int D>
struct KmsCandidate {
  using W = weight_t<S>;
  W lambda = W(0);
  double beta = 0.0;
  CandidateKind kind = CandidateKind::hutchinson;
  std::optional<Vec<S, D>> root;  // orbit kind
  std::string label;
  std::vector<W> mixture_weights;
  std::size_t depth = 0;
  bool non_kms = false;  // root outside B: allowed for experiments only
  DiscreteMeasure<S, D> measure;
};

// ceil(log(target) / log(N/lambda)) - 1, at least 0
inline std::size_t depth_for_defect(std::size_t n_maps, double lambda, double target) {
  if (!(lambda > static_cast<double>(n_maps))) throw UnboundedSeriesError("lambda must exceed N");
  const double q = static_cast<double>(n_maps) / lambda;
  const double d = std::ceil(std::log(target) / std::log(q)) - 1.0;
  return d < 0.0 ? 0 : static_cast<std::size_t>(d);
}

template <class W>
W power_of(const W& base, std::size_t e) {
  W r = W(1);
  for (std::size_t i = 0; i < e; ++i) r *= base;
  return r;
}

// mu_{y,lambda} = ((lambda-N)/lambda) sum_n lambda^{-n} sum_{|w|=n} delta_{w(y)}, truncated at depth.
template <class S, int D>
KmsCandidate<S, D> orbit_measure(const IfsSystem<S, D>& ifs, const BranchReport<S, D>& report,
                                 const Vec<S, D>& y, const weight_t<S>& lambda, std::size_t depth,
                                 std::size_t budget = kDefaultAtomBudget) {
  using W = weight_t<S>;
  const W N = W(static_cast<long>(ifs.size()));
  if (!(lambda > N))
    throw UnboundedSeriesError("lambda = " + format_double(weight_to_double(lambda)) +
                               " <= N: the orbit series is unbounded; N < lambda is necessary");
  const auto tree = orbit(ifs, y, depth, budget);
  KmsCandidate<S, D> c;
  c.lambda = lambda;
  c.beta = std::log(weight_to_double(lambda));
  c.kind = CandidateKind::orbit;
  c.root = y;
  c.depth = depth;
  c.non_kms = !report.is_branch_point(y);
  PointSet<S, D> set(is_exact_v<S> ? 0.0 : ifs.collision_tolerance());
  auto& m = c.measure;
  W level_weight = (lambda - N) / lambda;
  for (std::size_t n = 0; n <= depth; ++n) {
    for (std::size_t i = 0; i < tree.levels[n].size(); ++i) {
      auto [id, inserted] = set.insert(tree.levels[n][i]);
      if (inserted) {
        m.points.push_back(tree.levels[n][i]);
        m.weights.push_back(level_weight);
        m.labels.push_back(n == 0 ? "e" : tree.word(n, i).to_string());
      } else {
        m.weights[id] += level_weight;
      }
    }
    level_weight /= lambda;
  }
  m.mass_defect = power_of(N / lambda, depth + 1);
  return c;
}

// sum_i w_i m_i over a common system; atoms merged exactly.
template <class S, int D>
KmsCandidate<S, D> mixture(const std::vector<const KmsCandidate<S, D>*>& parts,
                           const std::vector<weight_t<S>>& w, double tol = 0.0) {
  using W = weight_t<S>;
  if (parts.empty() || parts.size() != w.size()) throw ShapeError("mixture needs one weight per part");
  W sum = W(0);
  for (const auto& x : w) {
    if (x < W(0)) throw DomainError("mixture weights must be nonnegative");
    sum += x;
  }
  if (std::abs(weight_to_double(sum) - 1.0) > 1e-12) throw NormalizationError("mixture weights must sum to 1");
  KmsCandidate<S, D> c;
  c.lambda = parts.front()->lambda;
  c.beta = parts.front()->beta;
  c.kind = CandidateKind::mixture;
  c.mixture_weights = w;
  DiscreteMeasure<S, D> all;
  for (std::size_t k = 0; k < parts.size(); ++k) {
    if (w[k] == W(0)) continue;
    const auto& m = parts[k]->measure;
    for (std::size_t i = 0; i < m.size(); ++i) all.add(m.points[i], w[k] * m.weights[i]);
    all.mass_defect += w[k] * m.mass_defect;
    all.resolution = std::max(all.resolution, m.resolution);
    c.depth = std::max(c.depth, parts[k]->depth);
  }
  c.measure = merge_atoms(all, tol);
  return c;
}

struct Integral {
  double value = 0.0;
  double error_bar = 0.0;  // mass_defect * sup|a|
};

// sum_i w_i a(p_i) in floating point (pairwise summation).
template <class S, int D, class F>
Integral integrate(const DiscreteMeasure<S, D>& m, F&& a, std::optional<double> sup_abs = std::nullopt) {
  std::vector<double> terms(m.size());
  double sup = 0.0;
  for (std::size_t i = 0; i < m.size(); ++i) {
    const double v = a(m.points[i]);
    sup = std::max(sup, std::abs(v));
    terms[i] = weight_to_double(m.weights[i]) * v;
  }
  Integral r;
  r.value = pairwise_sum(terms.data(), terms.size());
  r.error_bar = m.defect_double() * sup_abs.value_or(sup);
  return r;
}

// Exact sum_i w_i a(p_i); `a` returns a weight-type value.
template <class S, int D, class F>
weight_t<S> integrate_exact(const DiscreteMeasure<S, D>& m, F&& a) {
  weight_t<S> s = weight_t<S>(0);
  for (std::size_t i = 0; i < m.size(); ++i) s += m.weights[i] * a(m.points[i]);
  return s;
}

// c_mu(x) = mu({x}): exact equality, or all atoms within `radius` (flagged).
template <class S, int D>
weight_t<S> point_mass(const DiscreteMeasure<S, D>& m, const Vec<S, D>& x, double radius = 0.0) {
  weight_t<S> s = weight_t<S>(0);
  for (std::size_t i = 0; i < m.size(); ++i) {
    bool hit;
    if constexpr (is_exact_v<S>) {
      hit = radius == 0.0 ? m.points[i] == x : (to_double(m.points[i]) - to_double(x)).norm() <= radius;
    } else {
      hit = (m.points[i] - x).norm() <= radius;
    }
    if (hit) s += m.weights[i];
  }
  return s;
}

template <class S, int D>
DiscreteMeasure<double, D> to_double_measure(const DiscreteMeasure<S, D>& m) {
  DiscreteMeasure<double, D> out;
  out.points.reserve(m.size());
  for (std::size_t i = 0; i < m.size(); ++i) {
    out.points.push_back(to_double(m.points[i]));
    out.weights.push_back(weight_to_double(m.weights[i]));
  }
  out.labels = m.labels;
  out.mass_defect = m.defect_double();
  out.resolution = m.resolution;
  return out;
}

}  // namespace kmsf

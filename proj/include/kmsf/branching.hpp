#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "kmsf/error.hpp"
#include "kmsf/ifs.hpp"
#include "kmsf/point_set.hpp"

namespace kmsf {

template <class S, int D>
struct BranchPair {
  Vec<S, D> y;             // branch value, in C
  Vec<S, D> x;             // common image, in B
  std::vector<int> maps;   // J, 0-based, ascending, |J| >= 2
};

template <class S, int D>
struct BranchReport {
  using Point = Vec<S, D>;

  std::vector<Point> branch_values;  // C, canonical order
  std::vector<Point> branch_points;  // B, canonical order
  std::vector<Point> c_tilde;        // union of preimages of B inside K
  std::vector<BranchPair<S, D>> pairs;
  bool finite_branch = true;
  bool heuristic = false;  // callable maps or approximate membership
  double tol = 0.0;        // float collision tolerance (0 in exact mode)

  bool is_branch_value(const Point& y) const { return index_of(branch_values, y).has_value(); }
  bool is_branch_point(const Point& x) const { return index_of(branch_points, x).has_value(); }

  std::optional<std::size_t> index_of(const std::vector<Point>& set, const Point& p) const {
    for (std::size_t i = 0; i < set.size(); ++i)
      if (point_equal<S, D>(set[i], p, tol)) return i;
    return std::nullopt;
  }

  // e(x, y) from the recorded pairs; 1 for a non-branch image.
  int e(const Point& x, const Point& y) const {
    for (const auto& p : pairs)
      if (point_equal<S, D>(p.x, x, tol) && point_equal<S, D>(p.y, y, tol))
        return static_cast<int>(p.maps.size());
    return 1;
  }
};

namespace detail {

template <class S, int D>
void sort_points(std::vector<Vec<S, D>>& pts) {
  std::sort(pts.begin(), pts.end(), PointLess<S, D>{});
}

template <class S, int D>
double point_tolerance(const IfsSystem<S, D>& ifs) {
  if constexpr (is_exact_v<S>) {
    (void)ifs;
    return 0.0;
  } else {
    return ifs.collision_tolerance();
  }
}

// Groups the maps by their image of y; keeps groups of size >= 2.
template <class S, int D>
std::vector<BranchPair<S, D>> coincidences_at(const IfsSystem<S, D>& ifs, const Vec<S, D>& y,
                                              double tol) {
  PointSet<S, D> images(tol);
  std::vector<std::vector<int>> groups;
  for (std::size_t j = 0; j < ifs.size(); ++j) {
    auto [id, inserted] = images.insert(ifs.maps()[j](y));
    if (inserted) groups.emplace_back();
    groups[id].push_back(static_cast<int>(j));
  }
  std::vector<BranchPair<S, D>> out;
  for (std::size_t g = 0; g < groups.size(); ++g)
    if (groups[g].size() >= 2) out.push_back({y, images[g], groups[g]});
  return out;
}

}  // namespace detail

// gamma^{-1}(x) restricted to K, as (map index, preimage) pairs.
template <class S, int D>
struct InverseImage {
  int map = -1;
  Vec<S, D> y;
  bool approximate = false;
};

template <class S, int D>
std::vector<InverseImage<S, D>> inverse_images(const IfsSystem<S, D>& ifs, const Vec<S, D>& x) {
  std::vector<InverseImage<S, D>> out;
  for (std::size_t j = 0; j < ifs.size(); ++j) {
    const auto y = ifs.maps()[j].preimage(x);
    if (!y) continue;
    const Membership m = ifs.contains(*y);
    if (m.inside) out.push_back({static_cast<int>(j), *y, m.approximate});
  }
  return out;
}

// I(x): indices j with x in gamma_j(K).
template <class S, int D>
std::vector<int> image_index_set(const IfsSystem<S, D>& ifs, const Vec<S, D>& x) {
  std::vector<int> out;
  for (const auto& r : inverse_images(ifs, x)) out.push_back(r.map);
  return out;
}

// e(x, y) = #{ j : gamma_j(y) = x }.
template <class S, int D>
int branch_index(const IfsSystem<S, D>& ifs, const Vec<S, D>& x, const Vec<S, D>& y) {
  const double tol = detail::point_tolerance(ifs);
  int count = 0;
  for (const auto& m : ifs.maps())
    if (point_equal<S, D>(m(y), x, tol)) ++count;
  if (count == 0) throw NotAnImageError("point is not an image of y under any map");
  return count;
}

template <class S, int D>
BranchReport<S, D> branch_values(const IfsSystem<S, D>& ifs) {
  BranchReport<S, D> rep;
  rep.tol = detail::point_tolerance(ifs);
  PointSet<S, D> candidates(rep.tol);

  if (ifs.all_affine()) {
    for (std::size_t j = 0; j < ifs.size(); ++j) {
      for (std::size_t k = j + 1; k < ifs.size(); ++k) {
        const auto& mj = ifs.maps()[j];
        const auto& mk = ifs.maps()[k];
        const Mat<S, D> a = mj.matrix() - mk.matrix();
        const Vec<S, D> b = mk.translation() - mj.translation();
        const auto sol = field_solve<S, D>(a, b);
        if (sol.kind == SolveKind::none) continue;
        if (sol.kind == SolveKind::infinite) {
          bool same = true;
          for (Eigen::Index r = 0; r < a.rows() && same; ++r) {
            if (scalar_traits<S>::sign(b(r)) != 0 &&
                (is_exact_v<S> || std::abs(to_double(b(r))) > rep.tol))
              same = false;
            for (Eigen::Index c = 0; c < a.cols() && same; ++c)
              if (is_exact_v<S> ? scalar_traits<S>::sign(a(r, c)) != 0
                                : std::abs(to_double(a(r, c))) > 1e-13)
                same = false;
          }
          if (same)
            throw DegenerateSystemError("maps " + std::to_string(j + 1) + " and " +
                                        std::to_string(k + 1) + " are identical");
          // coincidence along an affine subspace: C is not finite
          rep.finite_branch = false;
          continue;
        }
        const Membership m = ifs.contains(sol.solution);
        if (!m.inside) continue;
        if (m.approximate) rep.heuristic = true;
        candidates.insert(sol.solution);
      }
    }
  } else {
    // Callable maps: minimise the pairwise gap over a cloud of K.
    rep.heuristic = true;
    const auto fifs = ifs.template cast<double>();
    const auto cloud = attractor_approx(fifs, std::min<std::size_t>(
                                                  12, static_cast<std::size_t>(std::floor(
                                                          std::log(1e5) / std::log(ifs.size())))),
                                        VecD<D>(ifs.box().center()));
    for (std::size_t j = 0; j < ifs.size(); ++j) {
      for (std::size_t k = j + 1; k < ifs.size(); ++k) {
        double best = std::numeric_limits<double>::infinity();
        std::size_t arg = 0;
        for (std::size_t i = 0; i < cloud.points.size(); ++i) {
          const auto& p = cloud.points[i];
          const double gap = (fifs.maps()[j](p) - fifs.maps()[k](p)).norm();
          if (gap < best) {
            best = gap;
            arg = i;
          }
        }
        if (best <= 4.0 * cloud.resolution) {
          if constexpr (std::is_same_v<S, double>) candidates.insert(cloud.points[arg]);
        }
      }
    }
  }

  for (const auto& y : candidates.points()) {
    auto pairs = detail::coincidences_at(ifs, y, rep.tol);
    for (auto& p : pairs) rep.pairs.push_back(std::move(p));
  }
  std::sort(rep.pairs.begin(), rep.pairs.end(), [](const auto& a, const auto& b) {
    if (point_less<S, D>(a.y, b.y)) return true;
    if (point_less<S, D>(b.y, a.y)) return false;
    return point_less<S, D>(a.x, b.x);
  });

  PointSet<S, D> cs(rep.tol), bs(rep.tol);
  for (const auto& p : rep.pairs) {
    cs.insert(p.y);
    bs.insert(p.x);
  }
  rep.branch_values = cs.points();
  rep.branch_points = bs.points();
  detail::sort_points(rep.branch_values);
  detail::sort_points(rep.branch_points);

  PointSet<S, D> ct(rep.tol);
  for (const auto& x : rep.branch_points)
    for (const auto& r : inverse_images(ifs, x)) ct.insert(r.y);
  rep.c_tilde = ct.points();
  detail::sort_points(rep.c_tilde);
  return rep;
}

// Orbit of y to a given depth. Level n holds the N^n images of y under words
// of length n in lexicographic order: level n+1 = concat_j gamma_j(level n).
template <class S, int D>
struct OrbitTree {
  using Point = Vec<S, D>;

  struct Distinct {
    Point point;
    std::size_t level = 0;
    std::size_t index = 0;  // first word producing the point
    std::size_t multiplicity = 0;
  };
  struct Collision {
    Word first;
    Word second;
  };

  Point root;
  std::size_t depth = 0;
  std::size_t n_maps = 0;
  std::vector<std::vector<Point>> levels;
  std::vector<Distinct> distinct;
  std::vector<Collision> collisions;  // capped sample
  std::size_t collision_count = 0;

  Word word(std::size_t level, std::size_t index) const { return word_at(index, level, n_maps); }
  std::size_t word_count() const {
    std::size_t n = 0;
    for (const auto& l : levels) n += l.size();
    return n;
  }
};

inline constexpr std::size_t kMaxRecordedCollisions = 64;

template <class S, int D>
OrbitTree<S, D> orbit(const IfsSystem<S, D>& ifs, const Vec<S, D>& y, std::size_t depth,
                      std::size_t budget = kDefaultAtomBudget) {
  std::size_t total = 0, level_size = 1;
  for (std::size_t n = 0; n <= depth; ++n) {
    total += level_size;
    if (total > budget) throw BudgetError("orbit of depth " + std::to_string(depth) +
                                          " exceeds the atom budget " + std::to_string(budget));
    if (n < depth) {
      if (level_size > budget / ifs.size()) throw BudgetError("orbit exceeds the atom budget");
      level_size *= ifs.size();
    }
  }
  OrbitTree<S, D> t;
  t.root = y;
  t.depth = depth;
  t.n_maps = ifs.size();
  t.levels.push_back({y});
  for (std::size_t n = 0; n < depth; ++n) {
    const auto& prev = t.levels.back();
    std::vector<Vec<S, D>> next(prev.size() * ifs.size());
    for (std::size_t j = 0; j < ifs.size(); ++j)
      for (std::size_t i = 0; i < prev.size(); ++i) next[j * prev.size() + i] = ifs.maps()[j](prev[i]);
    t.levels.push_back(std::move(next));
  }
  PointSet<S, D> seen(detail::point_tolerance(ifs));
  for (std::size_t n = 0; n <= depth; ++n) {
    for (std::size_t i = 0; i < t.levels[n].size(); ++i) {
      auto [id, inserted] = seen.insert(t.levels[n][i]);
      if (inserted) {
        t.distinct.push_back({t.levels[n][i], n, i, 1});
      } else {
        auto& d = t.distinct[id];
        ++d.multiplicity;
        ++t.collision_count;
        if (t.collisions.size() < kMaxRecordedCollisions)
          t.collisions.push_back({t.word(d.level, d.index), t.word(n, i)});
      }
    }
  }
  return t;
}

template <int D>
struct OrbitWitness {
  std::string kind;  // "collision", "hits_C", "overlap"
  std::string detail;
};

template <int D>
struct OrbitLemmaVerdict {
  bool pass = true;
  std::size_t depth = 0;
  std::size_t orbits = 0;
  std::size_t points_checked = 0;
  std::vector<OrbitWitness<D>> witnesses;
};

// Orbits of the branch points avoid C, are injective in the word, and are
// pairwise disjoint, all up to `depth`.
template <class S, int D>
OrbitLemmaVerdict<D> check_orbit_lemmas(const IfsSystem<S, D>& ifs,
                                        const BranchReport<S, D>& report, std::size_t depth,
                                        std::size_t max_witnesses = 16) {
  OrbitLemmaVerdict<D> v;
  v.depth = depth;
  v.orbits = report.branch_points.size();
  const double tol = detail::point_tolerance(ifs);
  PointSet<S, D> all(tol);
  std::vector<std::pair<std::size_t, Word>> owner;  // orbit id, word of the first hit
  auto add = [&](OrbitWitness<D> w) {
    v.pass = false;
    if (v.witnesses.size() < max_witnesses) v.witnesses.push_back(std::move(w));
  };
  for (std::size_t o = 0; o < report.branch_points.size(); ++o) {
    const auto tree = orbit(ifs, report.branch_points[o], depth);
    for (const auto& c : tree.collisions)
      add({"collision", "orbit " + std::to_string(o + 1) + ": words " + c.first.to_string() +
                            " and " + c.second.to_string() + " give the same point"});
    if (tree.collision_count > tree.collisions.size())
      add({"collision", std::to_string(tree.collision_count) + " collisions in orbit " +
                            std::to_string(o + 1)});
    for (const auto& d : tree.distinct) {
      ++v.points_checked;
      const Word w = tree.word(d.level, d.index);
      if (report.is_branch_value(d.point))
        add({"hits_C", "orbit " + std::to_string(o + 1) + " word " + w.to_string() +
                           " lands in C"});
      auto [id, inserted] = all.insert(d.point);
      if (inserted) {
        owner.emplace_back(o, w);
      } else if (owner[id].first != o) {
        add({"overlap", "orbits " + std::to_string(owner[id].first + 1) + " and " +
                            std::to_string(o + 1) + " meet (words " + owner[id].second.to_string() +
                            ", " + w.to_string() + ")"});
      }
    }
  }
  return v;
}

}  // namespace kmsf

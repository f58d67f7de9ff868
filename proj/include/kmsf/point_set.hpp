#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <unordered_map>
#include <vector>

#include "kmsf/linalg.hpp"

namespace kmsf {

template <class S, int D>
struct PointLess {
  bool operator()(const Vec<S, D>& a, const Vec<S, D>& b) const { return point_less<S, D>(a, b); }
};

// Assigns ids to points. Exact scalars key on the coordinates themselves;
// doubles bucket on a grid of side `tol` and identify points closer than tol.
template <class S, int D>
class PointSet {
 public:
  using Point = Vec<S, D>;

  explicit PointSet(double tol = 0.0) : tol_(tol) {}

  std::size_t size() const { return points_.size(); }
  const Point& operator[](std::size_t id) const { return points_[id]; }
  const std::vector<Point>& points() const { return points_; }

  std::optional<std::size_t> find(const Point& p) const {
    if constexpr (is_exact_v<S>) {
      auto it = exact_.find(p);
      if (it == exact_.end()) return std::nullopt;
      return it->second;
    } else {
      return find_near(p);
    }
  }

  // Returns (id, inserted).
  std::pair<std::size_t, bool> insert(const Point& p) {
    if (auto id = find(p)) return {*id, false};
    const std::size_t id = points_.size();
    points_.push_back(p);
    if constexpr (is_exact_v<S>) {
      exact_.emplace(p, id);
    } else {
      buckets_[hash_key(cell_of(p))].push_back(id);
    }
    return {id, true};
  }

 private:
  std::vector<std::int64_t> cell_of(const Point& p) const {
    std::vector<std::int64_t> c(p.size());
    const double side = tol_ > 0.0 ? tol_ : 1e-300;
    for (Eigen::Index i = 0; i < p.size(); ++i)
      c[i] = static_cast<std::int64_t>(std::floor(to_double(p(i)) / side));
    return c;
  }

  static std::uint64_t hash_key(const std::vector<std::int64_t>& c) {
    std::uint64_t h = 1469598103934665603ull;
    for (auto v : c) {
      h ^= static_cast<std::uint64_t>(v) + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
    }
    return h;
  }

  std::optional<std::size_t> find_near(const Point& p) const {
    if (points_.empty()) return std::nullopt;
    const auto base = cell_of(p);
    const int d = static_cast<int>(base.size());
    std::vector<std::int64_t> c(base);
    std::optional<std::size_t> best;
    double best_d = tol_;
    // 3^d neighbouring cells
    int combos = 1;
    for (int i = 0; i < d; ++i) combos *= 3;
    for (int m = 0; m < combos; ++m) {
      int r = m;
      for (int i = 0; i < d; ++i) {
        c[i] = base[i] + (r % 3) - 1;
        r /= 3;
      }
      auto it = buckets_.find(hash_key(c));
      if (it == buckets_.end()) continue;
      for (std::size_t id : it->second) {
        const double dist = (to_double(points_[id]) - to_double(p)).norm();
        if (dist < best_d || (dist == best_d && dist == 0.0)) {
          if (!best || dist < best_d || id < *best) {
            best = id;
            best_d = dist;
          }
        }
      }
    }
    return best;
  }

  double tol_;
  std::vector<Point> points_;
  std::map<Point, std::size_t, PointLess<S, D>> exact_;
  std::unordered_map<std::uint64_t, std::vector<std::size_t>> buckets_;
};

}  // namespace kmsf

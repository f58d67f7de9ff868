#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <vector>

#include "kmsf/linalg.hpp"

namespace kmsf {

// Uniform-grid nearest-neighbour index over a point cloud in R^d (small d).
template <int D>
class GridIndex {
 public:
  using Point = VecD<D>;

  explicit GridIndex(std::vector<Point> points) : points_(std::move(points)) {
    if (points_.empty()) return;
    dim_ = static_cast<int>(points_.front().size());
    lo_ = points_.front();
    hi_ = points_.front();
    for (const auto& p : points_) {
      lo_ = lo_.cwiseMin(p);
      hi_ = hi_.cwiseMax(p);
    }
    const double extent = std::max((hi_ - lo_).maxCoeff(), 1e-300);
    const double per_axis = std::pow(static_cast<double>(points_.size()), 1.0 / dim_);
    cell_ = extent / std::max(1.0, per_axis);
    max_cell_.assign(dim_, 0);
    for (std::size_t i = 0; i < points_.size(); ++i) {
      auto key = key_of(points_[i]);
      for (int a = 0; a < dim_; ++a) max_cell_[a] = std::max(max_cell_[a], key[a]);
      cells_[key].push_back(i);
    }
  }

  bool empty() const { return points_.empty(); }
  const std::vector<Point>& points() const { return points_; }

  double nearest_distance(const Point& q) const {
    if (points_.empty()) return std::numeric_limits<double>::infinity();
    std::vector<std::int64_t> center = key_of(q);
    std::int64_t max_ring = 0;
    for (int a = 0; a < dim_; ++a) {
      max_ring = std::max(max_ring, std::abs(center[a]));
      max_ring = std::max(max_ring, std::abs(center[a] - max_cell_[a]));
    }
    double best = std::numeric_limits<double>::infinity();
    std::vector<std::int64_t> offset(dim_);
    for (std::int64_t r = 0; r <= max_ring; ++r) {
      if (best <= static_cast<double>(r - 1) * cell_) break;
      visit_ring(center, r, 0, offset, false, [&](const std::vector<std::int64_t>& key) {
        auto it = cells_.find(key);
        if (it == cells_.end()) return;
        for (std::size_t idx : it->second) best = std::min(best, (points_[idx] - q).norm());
      });
    }
    return best;
  }

 private:
  std::vector<std::int64_t> key_of(const Point& p) const {
    std::vector<std::int64_t> key(dim_);
    for (int a = 0; a < dim_; ++a)
      key[a] = static_cast<std::int64_t>(std::floor((p(a) - lo_(a)) / cell_));
    return key;
  }

  // Enumerates cells whose Chebyshev offset from `center` is exactly r.
  template <class F>
  void visit_ring(const std::vector<std::int64_t>& center, std::int64_t r, int axis,
                  std::vector<std::int64_t>& offset, bool on_shell, F&& f) const {
    if (axis == dim_) {
      if (!on_shell && r > 0) return;
      std::vector<std::int64_t> key(dim_);
      for (int a = 0; a < dim_; ++a) key[a] = center[a] + offset[a];
      f(key);
      return;
    }
    for (std::int64_t o = -r; o <= r; ++o) {
      offset[axis] = o;
      visit_ring(center, r, axis + 1, offset, on_shell || std::abs(o) == r, f);
    }
  }

  std::vector<Point> points_;
  int dim_ = 0;
  Point lo_, hi_;
  double cell_ = 1.0;
  std::vector<std::int64_t> max_cell_;
  std::map<std::vector<std::int64_t>, std::vector<std::size_t>> cells_;
};

// Largest distance from a point of `from` to the set `to`.
template <int D>
double directed_hausdorff(const std::vector<VecD<D>>& from, const GridIndex<D>& to) {
  double worst = 0.0;
  for (const auto& p : from) worst = std::max(worst, to.nearest_distance(p));
  return worst;
}

template <int D>
double hausdorff_distance(const std::vector<VecD<D>>& a, const std::vector<VecD<D>>& b) {
  if (a.empty() || b.empty()) return std::numeric_limits<double>::infinity();
  GridIndex<D> ia(a);
  GridIndex<D> ib(b);
  return std::max(directed_hausdorff(a, ib), directed_hausdorff(b, ia));
}

}  // namespace kmsf

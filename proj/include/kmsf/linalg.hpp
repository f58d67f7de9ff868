#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "kmsf/scalar.hpp"

namespace kmsf {

template <class S, int D>
using Vec = Eigen::Matrix<S, D, 1>;

template <class S, int D>
using Mat = Eigen::Matrix<S, D, D>;

template <int D>
using VecD = Eigen::Matrix<double, D, 1>;

template <class S, int D>
VecD<D> to_double(const Vec<S, D>& v) {
  VecD<D> out(v.size());
  for (Eigen::Index i = 0; i < v.size(); ++i) out(i) = to_double(v(i));
  return out;
}

template <class S, int D>
Vec<S, D> from_double(const VecD<D>& v) {
  Vec<S, D> out(v.size());
  for (Eigen::Index i = 0; i < v.size(); ++i) out(i) = from_double<S>(v(i));
  return out;
}

// Lexicographic order on the canonical representation of coordinates.
template <class S, int D>
bool point_less(const Vec<S, D>& a, const Vec<S, D>& b) {
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    if (scalar_traits<S>::canonical_less(a(i), b(i))) return true;
    if (scalar_traits<S>::canonical_less(b(i), a(i))) return false;
  }
  return false;
}

template <class S, int D>
bool point_equal(const Vec<S, D>& a, const Vec<S, D>& b, double tol) {
  if constexpr (is_exact_v<S>) {
    (void)tol;
    return a == b;
  } else {
    return (a - b).norm() <= tol;
  }
}

namespace detail {

template <class S>
bool is_zero_pivot(const S& x, double scale) {
  if constexpr (is_exact_v<S>) {
    (void)scale;
    return x == S(0);
  } else {
    return std::abs(x) <= 1e-13 * scale;
  }
}

template <class S>
double magnitude(const S& x) {
  return std::abs(to_double(x));
}

}  // namespace detail

enum class SolveKind { unique, none, infinite };

template <class S, int D>
struct SolveResult {
  SolveKind kind = SolveKind::none;
  Vec<S, D> solution;
};

// Gauss-Jordan elimination over a field. Exact scalars pivot on the first
// nonzero entry; doubles pivot on the largest magnitude.
template <class S, int D>
SolveResult<S, D> field_solve(Mat<S, D> a, Vec<S, D> b) {
  const Eigen::Index n = a.rows();
  double scale = 0.0;
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) scale = std::max(scale, detail::magnitude(a(i, j)));
  if (scale == 0.0) scale = 1.0;

  Eigen::Index row = 0;
  std::vector<Eigen::Index> pivot_col;
  for (Eigen::Index col = 0; col < n && row < n; ++col) {
    Eigen::Index best = -1;
    double best_mag = -1.0;
    for (Eigen::Index r = row; r < n; ++r) {
      if (detail::is_zero_pivot(a(r, col), scale)) continue;
      if constexpr (is_exact_v<S>) {
        best = r;
        break;
      } else {
        const double m = std::abs(a(r, col));
        if (m > best_mag) {
          best_mag = m;
          best = r;
        }
      }
    }
    if (best < 0) continue;
    a.row(row).swap(a.row(best));
    std::swap(b(row), b(best));
    const S inv = S(1) / a(row, col);
    for (Eigen::Index j = 0; j < n; ++j) a(row, j) = a(row, j) * inv;
    b(row) = b(row) * inv;
    for (Eigen::Index r = 0; r < n; ++r) {
      if (r == row) continue;
      const S f = a(r, col);
      if (detail::is_zero_pivot(f, scale)) continue;
      for (Eigen::Index j = 0; j < n; ++j) a(r, j) = a(r, j) - f * a(row, j);
      b(r) = b(r) - f * b(row);
    }
    pivot_col.push_back(col);
    ++row;
  }

  SolveResult<S, D> out;
  out.solution = Vec<S, D>::Zero(n);
  for (Eigen::Index r = row; r < n; ++r) {
    if (!detail::is_zero_pivot(b(r), std::max(1.0, scale))) {
      out.kind = SolveKind::none;
      return out;
    }
  }
  for (Eigen::Index r = 0; r < row; ++r) out.solution(pivot_col[r]) = b(r);
  out.kind = row == n ? SolveKind::unique : SolveKind::infinite;
  return out;
}

template <class S, int D>
std::optional<Mat<S, D>> field_inverse(const Mat<S, D>& a) {
  const Eigen::Index n = a.rows();
  Mat<S, D> inv(n, n);
  for (Eigen::Index c = 0; c < n; ++c) {
    Vec<S, D> e = Vec<S, D>::Zero(n);
    e(c) = S(1);
    auto r = field_solve<S, D>(a, e);
    if (r.kind != SolveKind::unique) return std::nullopt;
    inv.col(c) = r.solution;
  }
  return inv;
}

template <class S, int D>
Mat<double, D> to_double_matrix(const Mat<S, D>& m) {
  Mat<double, D> out(m.rows(), m.cols());
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) out(i, j) = to_double(m(i, j));
  return out;
}

}  // namespace kmsf

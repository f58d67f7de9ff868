#pragma once

#include <string>
#include <utility>
#include <vector>

#include "kmsf/branching.hpp"
#include "kmsf/ifs.hpp"

namespace kmsf {

struct KnownFact {
  std::string id;
  std::string value;
};

template <class S, int D>
struct Preset {
  std::string name;
  IfsSystem<S, D> ifs;
  BranchReport<S, D> expected;
  std::vector<KnownFact> facts;
  OpenSet<S, D> open_set;
  Vec<S, D> natural_seed;  // interval midpoint / triangle centroid
};

using Point1 = Vec<Rational, 1>;
using Point2 = Vec<QSqrt3, 2>;

inline Point1 pt(const Rational& x) {
  Point1 p;
  p << x;
  return p;
}
inline Point2 pt(const QSqrt3& x, const QSqrt3& y) {
  Point2 p;
  p << x, y;
  return p;
}

// gamma_1(y) = y/2, gamma_2(y) = 1 - y/2 on [0,1].
Preset<Rational, 1> tent();
// gamma_1(y) = y/2, gamma_2(y) = (y+1)/2 on [0,1].
Preset<Rational, 1> doubling();
// Gasket on the triangle c_1 = (1/2, sqrt3/2), c_2 = (0,0), c_3 = (1,0).
Preset<QSqrt3, 2> sierpinski();

namespace gasket {
Point2 c(int i);  // 1-based vertex
Point2 b(int i);  // 1-based edge midpoint: b_1 on c_1c_2, b_2 on c_1c_3, b_3 on c_2c_3
bool in_triangle(const Point2& p);
// Exact address test: p in K up to sub-triangle level `depth`.
bool in_attractor(const IfsSystem<QSqrt3, 2>& ifs, const Point2& p, int depth = 40);
}  // namespace gasket

bool is_preset_name(const std::string& name);

}  // namespace kmsf

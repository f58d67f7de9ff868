#pragma once

#include <cmath>
#include <vector>

#include "kmsf/presets.hpp"

namespace th {

using kmsf::Rational;
using kmsf::QSqrt3;

inline Rational q(long p, long d = 1) { return Rational(p) / Rational(d); }

inline kmsf::Vec<Rational, 1> p1(long p, long d = 1) { return kmsf::pt(q(p, d)); }

inline kmsf::VecD<1> d1(double x) {
  kmsf::VecD<1> v;
  v << x;
  return v;
}

inline kmsf::VecD<2> d2(double x, double y) {
  kmsf::VecD<2> v;
  v << x, y;
  return v;
}

// a + b sqrt3 with rational coefficients
inline QSqrt3 s3(Rational a, Rational b = 0) { return QSqrt3(std::move(a), std::move(b)); }

}  // namespace th

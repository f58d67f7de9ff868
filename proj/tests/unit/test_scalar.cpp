#include <doctest.h>

#include <random>

#include "helpers.hpp"
#include "kmsf/linalg.hpp"

using namespace kmsf;
using th::q;
using th::s3;

TEST_CASE("sqrt3 field arithmetic") {
  const QSqrt3 r = QSqrt3::sqrt3();
  CHECK(r * r == QSqrt3(3));
  const QSqrt3 x = s3(q(1, 2), q(-3, 4));
  CHECK(x * x.inverse() == QSqrt3(1));
  CHECK((x + x) / QSqrt3(2) == x);
  CHECK(x - x == QSqrt3(0));
  CHECK(QSqrt3(0).sign() == 0);
}

TEST_CASE("sign and order agree with floating point away from ties") {
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<long> u(-40, 40);
  for (int i = 0; i < 2000; ++i) {
    const QSqrt3 a = s3(q(u(rng), 7), q(u(rng), 5));
    const QSqrt3 b = s3(q(u(rng), 7), q(u(rng), 5));
    const double da = a.to_double(), db = b.to_double();
    if (std::abs(da - db) < 1e-9) continue;
    CHECK((a < b) == (da < db));
    CHECK(a.sign() == (da > 0) - (da < 0));
  }
  // 7 - 4 sqrt3 is tiny and positive; 26^2 vs 3*15^2 = 676 vs 675
  CHECK(s3(7, -4).sign() == 1);
  CHECK(s3(26, -15).sign() == 1);
  CHECK(s3(-26, 15).sign() == -1);
}

TEST_CASE("canonical order is a strict total order on representations") {
  const QSqrt3 a = s3(1, 0), b = s3(0, 1), c = s3(1, 1);
  CHECK(canonical_less(a, c) != canonical_less(c, a));
  CHECK_FALSE(canonical_less(a, a));
  CHECK(canonical_less(a, b) != canonical_less(b, a));
}

TEST_CASE("rational strings and double formatting") {
  CHECK(rational_to_string(q(6, 8)) == "3/4");
  CHECK(rational_to_string(q(-4, 2)) == "-2");
  CHECK(scalar_traits<QSqrt3>::to_string(s3(q(1, 2), q(-1, 2))) == "1/2-1/2*sqrt3");
  CHECK(scalar_traits<QSqrt3>::to_string(s3(0, 1)) == "1*sqrt3");
  for (double x : {0.1, 1.0 / 3.0, 6.02214076e23, -2.5e-300}) CHECK(std::stod(format_double(x)) == x);
}

TEST_CASE("dyadic doubles convert exactly") {
  CHECK(from_double<Rational>(0.375) == q(3, 8));
  CHECK(weight_to_double(q(1, 1024)) == 1.0 / 1024.0);
}

#pragma once

#include <cmath>
#include <cstdio>
#include <ostream>
#include <stdexcept>
#include <string>
#include <utility>

#include <boost/multiprecision/gmp.hpp>
#include <Eigen/Core>

namespace kmsf {

using Rational = boost::multiprecision::number<boost::multiprecision::gmp_rational,
                                               boost::multiprecision::et_off>;

// Element a + b*sqrt(3) of the quadratic field Q(sqrt 3). The representation
// (a, b) is canonical, so equality is exact.
class QSqrt3 {
 public:
  QSqrt3() = default;
  QSqrt3(int v) : a_(v) {}  // NOLINT(google-explicit-constructor)
  QSqrt3(const Rational& a) : a_(a) {}  // NOLINT(google-explicit-constructor)
  QSqrt3(Rational a, Rational b) : a_(std::move(a)), b_(std::move(b)) {}

  static QSqrt3 sqrt3() { return {Rational(0), Rational(1)}; }

  const Rational& rational_part() const { return a_; }
  const Rational& sqrt3_part() const { return b_; }

  QSqrt3& operator+=(const QSqrt3& o) {
    a_ += o.a_;
    b_ += o.b_;
    return *this;
  }
  QSqrt3& operator-=(const QSqrt3& o) {
    a_ -= o.a_;
    b_ -= o.b_;
    return *this;
  }
  QSqrt3& operator*=(const QSqrt3& o) {
    Rational a = a_ * o.a_ + 3 * b_ * o.b_;
    Rational b = a_ * o.b_ + b_ * o.a_;
    a_ = std::move(a);
    b_ = std::move(b);
    return *this;
  }
  QSqrt3& operator/=(const QSqrt3& o) { return *this *= o.inverse(); }

  QSqrt3 operator-() const { return {-a_, -b_}; }

  QSqrt3 inverse() const {
    Rational norm = a_ * a_ - 3 * b_ * b_;
    if (norm == 0) throw std::domain_error("QSqrt3: division by zero");
    return {a_ / norm, -b_ / norm};
  }

  int sign() const {
    const int sa = a_.sign();
    const int sb = b_.sign();
    if (sb == 0) return sa;
    if (sa == 0) return sb;
    if (sa == sb) return sa;
    // opposite signs: compare a^2 with 3 b^2
    const int cmp = (a_ * a_).compare(3 * b_ * b_);
    return cmp > 0 ? sa : (cmp < 0 ? sb : 0);
  }

  double to_double() const {
    return a_.convert_to<double>() + b_.convert_to<double>() * std::sqrt(3.0);
  }

  friend QSqrt3 operator+(QSqrt3 x, const QSqrt3& y) { return x += y; }
  friend QSqrt3 operator-(QSqrt3 x, const QSqrt3& y) { return x -= y; }
  friend QSqrt3 operator*(QSqrt3 x, const QSqrt3& y) { return x *= y; }
  friend QSqrt3 operator/(QSqrt3 x, const QSqrt3& y) { return x /= y; }

  friend bool operator==(const QSqrt3& x, const QSqrt3& y) {
    return x.a_ == y.a_ && x.b_ == y.b_;
  }
  friend bool operator!=(const QSqrt3& x, const QSqrt3& y) { return !(x == y); }
  friend bool operator<(const QSqrt3& x, const QSqrt3& y) { return (x - y).sign() < 0; }
  friend bool operator>(const QSqrt3& x, const QSqrt3& y) { return y < x; }
  friend bool operator<=(const QSqrt3& x, const QSqrt3& y) { return !(y < x); }
  friend bool operator>=(const QSqrt3& x, const QSqrt3& y) { return !(x < y); }

  // Cheap total order on the representation; used for deduplication only.
  friend bool canonical_less(const QSqrt3& x, const QSqrt3& y) {
    const int c = x.a_.compare(y.a_);
    if (c != 0) return c < 0;
    return y.b_.compare(x.b_) > 0;
  }

 private:
  Rational a_{0};
  Rational b_{0};
};

bool canonical_less(const QSqrt3& x, const QSqrt3& y);

inline QSqrt3 abs(const QSqrt3& x) { return x.sign() < 0 ? -x : x; }

inline std::string rational_to_string(const Rational& r) {
  if (denominator(r) == 1) return numerator(r).str();
  return numerator(r).str() + "/" + denominator(r).str();
}

inline std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

template <class S>
struct scalar_traits;

template <>
struct scalar_traits<double> {
  static constexpr bool is_exact = false;
  using weight_type = double;
  static double to_double(double x) { return x; }
  static double from_double(double x) { return x; }
  static bool canonical_less(double a, double b) { return a < b; }
  static int sign(double x) { return (x > 0) - (x < 0); }
  static std::string to_string(double x) { return format_double(x); }
  static const char* name() { return "double"; }
};

template <>
struct scalar_traits<Rational> {
  static constexpr bool is_exact = true;
  using weight_type = Rational;
  static double to_double(const Rational& x) { return x.convert_to<double>(); }
  static Rational from_double(double x) { return Rational(x); }
  static bool canonical_less(const Rational& a, const Rational& b) { return a.compare(b) < 0; }
  static int sign(const Rational& x) { return x.sign(); }
  static std::string to_string(const Rational& x) { return rational_to_string(x); }
  static const char* name() { return "rational"; }
};

template <>
struct scalar_traits<QSqrt3> {
  static constexpr bool is_exact = true;
  using weight_type = Rational;
  static double to_double(const QSqrt3& x) { return x.to_double(); }
  static QSqrt3 from_double(double x) { return QSqrt3(Rational(x)); }
  static bool canonical_less(const QSqrt3& a, const QSqrt3& b) { return kmsf::canonical_less(a, b); }
  static int sign(const QSqrt3& x) { return x.sign(); }
  static std::string to_string(const QSqrt3& x) {
    const Rational& b = x.sqrt3_part();
    if (b == 0) return rational_to_string(x.rational_part());
    std::string s = x.rational_part() == 0 ? "" : rational_to_string(x.rational_part());
    if (b < 0) s += "-";
    else if (!s.empty()) s += "+";
    return s + rational_to_string(abs(b)) + "*sqrt3";
  }
  static const char* name() { return "q_sqrt3"; }
};

// for Eigen's printer and test diagnostics
inline std::ostream& operator<<(std::ostream& os, const QSqrt3& x) { return os << scalar_traits<QSqrt3>::to_string(x); }

template <class S>
inline constexpr bool is_exact_v = scalar_traits<S>::is_exact;

template <class S>
using weight_t = typename scalar_traits<S>::weight_type;

template <class S>
double to_double(const S& x) {
  return scalar_traits<S>::to_double(x);
}

template <class S>
S from_double(double x) {
  return scalar_traits<S>::from_double(x);
}

// Weight arithmetic helpers shared by exact and floating measures.
inline double weight_to_double(double w) { return w; }
inline double weight_to_double(const Rational& w) { return w.convert_to<double>(); }

}  // namespace kmsf

namespace Eigen {

template <>
struct NumTraits<kmsf::Rational> {
  using Real = kmsf::Rational;
  using NonInteger = kmsf::Rational;
  using Literal = kmsf::Rational;
  using Nested = kmsf::Rational;
  enum {
    IsComplex = 0,
    IsInteger = 0,
    IsSigned = 1,
    RequireInitialization = 1,
    ReadCost = 10,
    AddCost = 30,
    MulCost = 60
  };
  static Real epsilon() { return 0; }
  static Real dummy_precision() { return 0; }
  static Real highest() { return 0; }
  static Real lowest() { return 0; }
  static int digits10() { return 0; }
};

template <>
struct NumTraits<kmsf::QSqrt3> {
  using Real = kmsf::QSqrt3;
  using NonInteger = kmsf::QSqrt3;
  using Literal = kmsf::QSqrt3;
  using Nested = kmsf::QSqrt3;
  enum {
    IsComplex = 0,
    IsInteger = 0,
    IsSigned = 1,
    RequireInitialization = 1,
    ReadCost = 20,
    AddCost = 60,
    MulCost = 200
  };
  static Real epsilon() { return 0; }
  static Real dummy_precision() { return 0; }
  static Real highest() { return 0; }
  static Real lowest() { return 0; }
  static int digits10() { return 0; }
};

}  // namespace Eigen

#pragma once

#include <string>
#include <vector>

#include "kmsf/scalar.hpp"

namespace kmsf {

// Dense polynomial with rational coefficients, c[k] multiplies x^k.
class Polynomial {
 public:
  Polynomial() = default;
  explicit Polynomial(std::vector<Rational> coeffs);
  static Polynomial constant(const Rational& c);
  static Polynomial linear(const Rational& slope, const Rational& intercept);

  int degree() const { return static_cast<int>(c_.size()) - 1; }
  bool is_zero() const { return c_.empty(); }
  const std::vector<Rational>& coeffs() const { return c_; }

  Rational operator()(const Rational& x) const;
  double eval_double(double x) const;

  // p(alpha x + t)
  Polynomial compose_affine(const Rational& alpha, const Rational& t) const;

  friend Polynomial operator+(const Polynomial& a, const Polynomial& b);
  friend Polynomial operator-(const Polynomial& a, const Polynomial& b);
  friend Polynomial operator*(const Polynomial& a, const Polynomial& b);
  friend Polynomial operator*(const Rational& s, const Polynomial& p);
  friend bool operator==(const Polynomial& a, const Polynomial& b) { return a.c_ == b.c_; }

  std::string to_string() const;

 private:
  void trim();
  std::vector<Rational> c_;
  std::vector<double> d_;
};

// Continuous-or-not piecewise polynomial on [breaks.front(), breaks.back()].
// Piece i lives on [breaks[i], breaks[i+1]]; at an interior break the right
// piece is used.
class PiecewisePolynomial {
 public:
  PiecewisePolynomial() = default;
  PiecewisePolynomial(std::vector<Rational> breaks, std::vector<Polynomial> pieces);

  static PiecewisePolynomial constant(const Rational& lo, const Rational& hi, const Rational& c);
  static PiecewisePolynomial polynomial(const Rational& lo, const Rational& hi, Polynomial p);
  // linear interpolation through (knots[i], values[i]); knots increasing
  static PiecewisePolynomial interpolant(const std::vector<Rational>& knots,
                                         const std::vector<Rational>& values);

  const Rational& lo() const { return breaks_.front(); }
  const Rational& hi() const { return breaks_.back(); }
  const std::vector<Rational>& breaks() const { return breaks_; }
  const std::vector<Polynomial>& pieces() const { return pieces_; }
  std::size_t piece_count() const { return pieces_.size(); }
  int max_degree() const;

  Rational operator()(const Rational& x) const;
  double eval_double(double x) const;

  // x -> p(alpha x + t) on [lo, hi]; the image of [lo, hi] must lie in the domain
  PiecewisePolynomial compose_affine(const Rational& alpha, const Rational& t, const Rational& lo,
                                     const Rational& hi) const;

  friend PiecewisePolynomial operator+(const PiecewisePolynomial& a, const PiecewisePolynomial& b);
  friend PiecewisePolynomial operator*(const PiecewisePolynomial& a, const PiecewisePolynomial& b);
  friend PiecewisePolynomial operator*(const Rational& s, const PiecewisePolynomial& p);

 private:
  std::size_t piece_index(const Rational& x) const;
  std::size_t piece_index(double x) const;
  void simplify();
  void cache();

  std::vector<Rational> breaks_;
  std::vector<Polynomial> pieces_;
  std::vector<double> breaks_d_;
};

}  // namespace kmsf

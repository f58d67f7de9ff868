#include "kmsf/piecewise_polynomial.hpp"

#include <algorithm>
#include <stdexcept>

#include "kmsf/error.hpp"

namespace kmsf {

Polynomial::Polynomial(std::vector<Rational> coeffs) : c_(std::move(coeffs)) { trim(); }

Polynomial Polynomial::constant(const Rational& c) { return Polynomial({c}); }

Polynomial Polynomial::linear(const Rational& slope, const Rational& intercept) {
  return Polynomial({intercept, slope});
}

void Polynomial::trim() {
  while (!c_.empty() && c_.back() == 0) c_.pop_back();
  d_.resize(c_.size());
  for (std::size_t k = 0; k < c_.size(); ++k) d_[k] = c_[k].convert_to<double>();
}

Rational Polynomial::operator()(const Rational& x) const {
  Rational s = 0;
  for (std::size_t k = c_.size(); k-- > 0;) s = s * x + c_[k];
  return s;
}

double Polynomial::eval_double(double x) const {
  double s = 0.0;
  for (std::size_t k = d_.size(); k-- > 0;) s = s * x + d_[k];
  return s;
}

Polynomial Polynomial::compose_affine(const Rational& alpha, const Rational& t) const {
  // Horner in the polynomial ring: s <- s * (alpha x + t) + c_k
  std::vector<Rational> s;
  for (std::size_t k = c_.size(); k-- > 0;) {
    std::vector<Rational> next(s.size() + 1, Rational(0));
    for (std::size_t i = 0; i < s.size(); ++i) {
      next[i] += s[i] * t;
      next[i + 1] += s[i] * alpha;
    }
    next[0] += c_[k];
    s = std::move(next);
  }
  return Polynomial(std::move(s));
}

Polynomial operator+(const Polynomial& a, const Polynomial& b) {
  std::vector<Rational> c(std::max(a.c_.size(), b.c_.size()), Rational(0));
  for (std::size_t k = 0; k < a.c_.size(); ++k) c[k] += a.c_[k];
  for (std::size_t k = 0; k < b.c_.size(); ++k) c[k] += b.c_[k];
  return Polynomial(std::move(c));
}

Polynomial operator-(const Polynomial& a, const Polynomial& b) { return a + Rational(-1) * b; }

Polynomial operator*(const Polynomial& a, const Polynomial& b) {
  if (a.is_zero() || b.is_zero()) return {};
  std::vector<Rational> c(a.c_.size() + b.c_.size() - 1, Rational(0));
  for (std::size_t i = 0; i < a.c_.size(); ++i)
    for (std::size_t j = 0; j < b.c_.size(); ++j) c[i + j] += a.c_[i] * b.c_[j];
  return Polynomial(std::move(c));
}

Polynomial operator*(const Rational& s, const Polynomial& p) {
  std::vector<Rational> c(p.c_);
  for (auto& x : c) x *= s;
  return Polynomial(std::move(c));
}

std::string Polynomial::to_string() const {
  if (c_.empty()) return "0";
  std::string s;
  for (std::size_t k = 0; k < c_.size(); ++k) {
    if (c_[k] == 0) continue;
    if (!s.empty()) s += " + ";
    s += rational_to_string(c_[k]);
    if (k == 1) s += "*x";
    if (k > 1) s += "*x^" + std::to_string(k);
  }
  return s;
}

PiecewisePolynomial::PiecewisePolynomial(std::vector<Rational> breaks, std::vector<Polynomial> pieces)
    : breaks_(std::move(breaks)), pieces_(std::move(pieces)) {
  if (breaks_.size() < 2 || pieces_.size() + 1 != breaks_.size())
    throw ShapeError("piecewise polynomial needs m+1 breaks for m pieces");
  for (std::size_t i = 1; i < breaks_.size(); ++i)
    if (!(breaks_[i - 1] < breaks_[i])) throw DomainError("breaks must increase strictly");
  simplify();
}

PiecewisePolynomial PiecewisePolynomial::constant(const Rational& lo, const Rational& hi,
                                                  const Rational& c) {
  return polynomial(lo, hi, Polynomial::constant(c));
}

PiecewisePolynomial PiecewisePolynomial::polynomial(const Rational& lo, const Rational& hi,
                                                    Polynomial p) {
  return PiecewisePolynomial({lo, hi}, {std::move(p)});
}

PiecewisePolynomial PiecewisePolynomial::interpolant(const std::vector<Rational>& knots,
                                                     const std::vector<Rational>& values) {
  if (knots.size() != values.size() || knots.size() < 2)
    throw ShapeError("interpolant needs matching knots and values");
  std::vector<Polynomial> pieces;
  for (std::size_t i = 0; i + 1 < knots.size(); ++i) {
    const Rational slope = (values[i + 1] - values[i]) / (knots[i + 1] - knots[i]);
    pieces.push_back(Polynomial::linear(slope, values[i] - slope * knots[i]));
  }
  return PiecewisePolynomial(knots, std::move(pieces));
}

int PiecewisePolynomial::max_degree() const {
  int d = -1;
  for (const auto& p : pieces_) d = std::max(d, p.degree());
  return d;
}

void PiecewisePolynomial::simplify() {
  std::vector<Rational> b{breaks_.front()};
  std::vector<Polynomial> p;
  for (std::size_t i = 0; i < pieces_.size(); ++i) {
    if (!p.empty() && p.back() == pieces_[i]) {
      b.back() = breaks_[i + 1];
      continue;
    }
    p.push_back(pieces_[i]);
    b.push_back(breaks_[i + 1]);
  }
  breaks_ = std::move(b);
  pieces_ = std::move(p);
  cache();
}

void PiecewisePolynomial::cache() {
  breaks_d_.resize(breaks_.size());
  for (std::size_t i = 0; i < breaks_.size(); ++i) breaks_d_[i] = breaks_[i].convert_to<double>();
}

std::size_t PiecewisePolynomial::piece_index(const Rational& x) const {
  if (x < lo() || x > hi()) throw DomainError("argument outside the domain of the piecewise polynomial");
  auto it = std::upper_bound(breaks_.begin() + 1, breaks_.end() - 1, x);
  return static_cast<std::size_t>(it - (breaks_.begin() + 1));
}

std::size_t PiecewisePolynomial::piece_index(double x) const {
  auto it = std::upper_bound(breaks_d_.begin() + 1, breaks_d_.end() - 1, x);
  return static_cast<std::size_t>(it - (breaks_d_.begin() + 1));
}

Rational PiecewisePolynomial::operator()(const Rational& x) const { return pieces_[piece_index(x)](x); }

double PiecewisePolynomial::eval_double(double x) const { return pieces_[piece_index(x)].eval_double(x); }

PiecewisePolynomial PiecewisePolynomial::compose_affine(const Rational& alpha, const Rational& t,
                                                        const Rational& lo,
                                                        const Rational& hi) const {
  if (alpha == 0) throw DomainError("affine map must be invertible");
  const Rational a = alpha * lo + t, b = alpha * hi + t;
  if (std::min(a, b) < this->lo() || std::max(a, b) > this->hi())
    throw DomainError("affine image leaves the domain");
  std::vector<Rational> nb{lo, hi};
  for (std::size_t i = 1; i + 1 < breaks_.size(); ++i) {
    const Rational u = (breaks_[i] - t) / alpha;
    if (u > lo && u < hi) nb.push_back(u);
  }
  std::sort(nb.begin(), nb.end());
  nb.erase(std::unique(nb.begin(), nb.end()), nb.end());
  std::vector<Polynomial> pieces;
  for (std::size_t i = 0; i + 1 < nb.size(); ++i) {
    const Rational mid = (nb[i] + nb[i + 1]) / 2;
    pieces.push_back(pieces_[piece_index(Rational(alpha * mid + t))].compose_affine(alpha, t));
  }
  return PiecewisePolynomial(std::move(nb), std::move(pieces));
}

namespace {

template <class Op>
PiecewisePolynomial combine(const PiecewisePolynomial& a, const PiecewisePolynomial& b, Op op) {
  if (a.lo() != b.lo() || a.hi() != b.hi()) throw DomainError("piecewise polynomials on different domains");
  std::vector<Rational> nb;
  std::merge(a.breaks().begin(), a.breaks().end(), b.breaks().begin(), b.breaks().end(),
             std::back_inserter(nb));
  nb.erase(std::unique(nb.begin(), nb.end()), nb.end());
  std::vector<Polynomial> pieces;
  std::size_t ia = 0, ib = 0;
  for (std::size_t i = 0; i + 1 < nb.size(); ++i) {
    while (a.breaks()[ia + 1] <= nb[i]) ++ia;
    while (b.breaks()[ib + 1] <= nb[i]) ++ib;
    pieces.push_back(op(a.pieces()[ia], b.pieces()[ib]));
  }
  return PiecewisePolynomial(std::move(nb), std::move(pieces));
}

}  // namespace

PiecewisePolynomial operator+(const PiecewisePolynomial& a, const PiecewisePolynomial& b) {
  return combine(a, b, [](const Polynomial& p, const Polynomial& q) { return p + q; });
}

PiecewisePolynomial operator*(const PiecewisePolynomial& a, const PiecewisePolynomial& b) {
  return combine(a, b, [](const Polynomial& p, const Polynomial& q) { return p * q; });
}

PiecewisePolynomial operator*(const Rational& s, const PiecewisePolynomial& p) {
  std::vector<Polynomial> pieces;
  for (const auto& q : p.pieces()) pieces.push_back(s * q);
  return PiecewisePolynomial(p.breaks(), std::move(pieces));
}

}  // namespace kmsf

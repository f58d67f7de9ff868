#pragma once

#include <map>
#include <vector>

#include "kmsf/branching.hpp"
#include "kmsf/piecewise_polynomial.hpp"

namespace kmsf {

// Exact evaluation of the truncated orbit measure mu_{y,lambda} on interval
// systems without enumerating atoms. With L a = sum_j a o gamma_j and
// S_n = (L^n a)(y),
//   tau_D(a)  = ((lambda-N)/lambda) sum_{n<=D} lambda^{-n} S_n
//   tau_D(a~) = ((lambda-N)/lambda) sum_{n<=D} lambda^{-n} (S_{n+1} - corr_n)
// where corr_n removes the doubled images at orbit points lying in C.
// Point masses come from backward path counts.
class OrbitSeries {
 public:
  OrbitSeries(const IfsSystem<Rational, 1>& ifs, const BranchReport<Rational, 1>& report, Rational y,
              Rational lambda, std::size_t depth);

  std::size_t depth() const { return depth_; }
  const Rational& lambda() const { return lambda_; }
  const Rational& root() const { return y_; }
  std::size_t n_maps() const { return alpha_.size(); }

  // S_0 .. S_{depth+1}
  std::vector<Rational> sums(const PiecewisePolynomial& a) const;

  Rational tau(const PiecewisePolynomial& a) const;
  Rational tau_tilde(const PiecewisePolynomial& a) const;

  struct Identity {
    Rational tau, tau_tilde;
    Rational residual;          // lambda tau(a) - tau(a~) - (lambda-N) a(y)
    Rational literal_residual;  // same with ((lambda-N)/lambda) a(y); not a valid identity
    Rational tail;              // -(lambda-N) lambda^{-(D+1)} S_{D+1}, the exact truncation term
  };
  Identity identity(const PiecewisePolynomial& a) const;

  // (lambda-N)(N/lambda)^{D+1} sup|a|
  Rational residual_bound(const Rational& sup_abs) const;

  Rational total_mass() const;  // 1 - (N/lambda)^{D+1}
  Rational defect() const;      // (N/lambda)^{D+1}

  // number of words w with |w| = n and w(y) = x
  Rational path_count(const Rational& x, std::size_t n) const;
  // c_mu(x) for the truncated measure
  Rational point_mass(const Rational& x) const;

 private:
  PiecewisePolynomial transfer(const PiecewisePolynomial& a) const;
  bool in_domain(const Rational& x) const { return x >= lo_ && x <= hi_; }

  std::vector<Rational> alpha_, t_;  // gamma_j(x) = alpha_j x + t_j
  Rational lo_, hi_;
  Rational y_, lambda_;
  std::size_t depth_;
  // branch values reached by the orbit, with their collapse corrections
  struct Collapse {
    Rational c;
    std::vector<std::vector<int>> groups;  // maps with a common image
  };
  std::vector<Collapse> collapses_;
  mutable std::map<std::pair<std::size_t, Rational>, Rational> memo_;
};

}  // namespace kmsf

#include "kmsf/test_functions.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace kmsf {

namespace {

using PP = PiecewisePolynomial;

PP monomial(int k) {
  std::vector<Rational> c(k + 1, Rational(0));
  c[k] = 1;
  return PP::polynomial(0, 1, Polynomial(std::move(c)));
}

PP power_of(const PP& p, int k) {
  PP out = PP::constant(0, 1, 1);
  for (int i = 0; i < k; ++i) out = out * p;
  return out;
}

std::vector<Rational> sixteenths() {
  std::vector<Rational> knots;
  for (int j = 0; j <= 16; ++j) knots.emplace_back(j, 16);
  return knots;
}

// min_b |y - b| on [0,1], scaled so that its maximum is 1
std::optional<PP> scaled_distance(const std::vector<Rational>& B) {
  if (B.empty()) return std::nullopt;
  std::vector<Rational> pts(B);
  std::sort(pts.begin(), pts.end());
  std::vector<Rational> knots{0};
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (i > 0) knots.push_back((pts[i - 1] + pts[i]) / 2);
    knots.push_back(pts[i]);
  }
  knots.push_back(1);
  knots.erase(std::unique(knots.begin(), knots.end()), knots.end());
  std::vector<Rational> vals;
  Rational vmax = 0;
  for (const auto& x : knots) {
    Rational d = -1;
    for (const auto& b : pts) {
      const Rational g = abs(x - b);
      if (d < 0 || g < d) d = g;
    }
    vals.push_back(d);
    vmax = std::max(vmax, d);
  }
  for (auto& v : vals) v /= vmax;
  return PP::interpolant(knots, vals);
}

double pl_lipschitz(const std::vector<Rational>& knots, const std::vector<Rational>& vals) {
  double l = 0.0;
  for (std::size_t i = 0; i + 1 < knots.size(); ++i)
    l = std::max(l, std::abs(((vals[i + 1] - vals[i]) / (knots[i + 1] - knots[i])).convert_to<double>()));
  return l;
}

TestFunction<1> make1(std::string name, PP p, double lip) {
  TestFunction<1> t;
  t.name = std::move(name);
  auto shared = std::make_shared<PP>(p);
  t.fn = [shared](const VecD<1>& y) { return shared->eval_double(std::clamp(y(0), 0.0, 1.0)); };
  t.exact = std::move(p);
  t.lipschitz = lip;
  return t;
}

}  // namespace

TestFunctionFamily<1> interval_family(const std::vector<Rational>& B, std::uint64_t seed) {
  TestFunctionFamily<1> fam;
  fam.provenance = "monomials y^k (k<=6); (2y-1)^k (k<=6); PL bumps at j/16; 2|y-1/2| y^k; "
                   "(2y-1) y^k (k=1..7); seeded PL on 1/16 grid; seeded PL times distance to B; seed " +
                   std::to_string(seed);
  const PP centered = PP::polynomial(0, 1, Polynomial::linear(2, -1));
  const PP vee = PP::interpolant({0, Rational(1, 2), 1}, {1, 0, 1});  // |2y - 1|

  for (int k = 0; k <= 6; ++k) fam.members.push_back(make1("mono_" + std::to_string(k), monomial(k), k));
  for (int k = 1; k <= 6; ++k)
    fam.members.push_back(make1("centered_" + std::to_string(k), power_of(centered, k), 2.0 * k));
  for (int j = 1; j <= 15; ++j) {
    std::vector<Rational> knots{0}, vals{0};
    for (int s = -1; s <= 1; ++s) {
      const Rational x(j + s, 16);
      if (x <= 0 || x >= 1) continue;
      knots.push_back(x);
      vals.push_back(s == 0 ? 1 : 0);
    }
    knots.push_back(1);
    vals.push_back(0);
    fam.members.push_back(make1("bump_" + std::to_string(j), PP::interpolant(knots, vals), 16.0));
  }
  for (int k = 0; k <= 6; ++k)
    fam.members.push_back(make1("vee_" + std::to_string(k), vee * monomial(k), 2.0 + k));
  for (int k = 1; k <= 7; ++k)
    fam.members.push_back(make1("odd_" + std::to_string(k), centered * monomial(k), 2.0 + k));

  std::mt19937_64 rng(seed);
  auto draw = [&](bool nonneg) {
    // multiples of 1/1024 keep the exact forms small
    const std::int64_t lo = nonneg ? 0 : -1024;
    const std::uint64_t span = static_cast<std::uint64_t>(1024 - lo + 1);
    return Rational(static_cast<std::int64_t>(rng() % span) + lo, 1024);
  };
  const auto knots = sixteenths();
  auto random_pl = [&](bool nonneg, double& lip) {
    std::vector<Rational> vals;
    for (std::size_t i = 0; i < knots.size(); ++i) vals.push_back(draw(nonneg));
    lip = pl_lipschitz(knots, vals);
    return PP::interpolant(knots, vals);
  };
  for (int m = 0; m < 10; ++m) {
    double lip = 0.0;
    PP p = random_pl(m < 5, lip);
    fam.members.push_back(make1("random_pl_" + std::to_string(m), std::move(p), lip));
  }
  const auto dist = scaled_distance(B);
  for (int m = 0; m < 10; ++m) {
    double lip = 0.0;
    PP p = random_pl(m < 5, lip);
    if (dist) {
      // both factors are bounded by 1
      double dlip = 0.0;
      for (const auto& piece : dist->pieces())
        if (piece.degree() >= 1) dlip = std::max(dlip, std::abs(piece.coeffs()[1].convert_to<double>()));
      fam.members.push_back(make1("random_pl_dist_" + std::to_string(m), p * *dist, lip + dlip));
    } else {
      fam.members.push_back(make1("random_pl_extra_" + std::to_string(m), std::move(p), lip));
    }
  }

  for (auto& t : fam.members) {
    t.vanishes_on_B = std::all_of(B.begin(), B.end(), [&](const Rational& b) { return (*t.exact)(b) == 0; });
    bool pos = true;
    for (int i = 0; i <= 1024 && pos; ++i) pos = (*t.exact)(Rational(i, 1024)) >= 0;
    for (const auto& x : t.exact->breaks()) pos = pos && (*t.exact)(x) >= 0;
    t.positive = pos;
    t.sup_bound = 1.0;
  }
  return fam;
}

TestFunctionFamily<2> planar_family(const Box<2>& box, const std::vector<VecD<2>>& B,
                                    std::uint64_t seed) {
  TestFunctionFamily<2> fam;
  fam.provenance = "normalised monomials x^p y^q (p+q<=6); radial bumps on a 4x4 grid; distance to B "
                   "times monomials and bumps; seeded bump sums; seed " +
                   std::to_string(seed);
  const double diam = box.diameter();
  const double mx = std::max(std::abs(box.lo(0)), std::abs(box.hi(0)));
  const double my = std::max(std::abs(box.lo(1)), std::abs(box.hi(1)));
  auto dist = [B, diam](const VecD<2>& p) {
    if (B.empty()) return 1.0;
    double d = std::numeric_limits<double>::infinity();
    for (const auto& b : B) d = std::min(d, (p - b).norm());
    return d / diam;
  };
  const double dist_lip = B.empty() ? 0.0 : 1.0 / diam;
  auto mono = [mx, my](int p, int q) {
    return [p, q, mx, my](const VecD<2>& v) {
      return std::pow(v(0) / mx, p) * std::pow(v(1) / my, q);
    };
  };
  auto mono_lip = [mx, my](int p, int q) { return p / mx + q / my; };
  auto bump = [](VecD<2> c, double r) {
    return [c, r](const VecD<2>& v) { return std::max(0.0, 1.0 - (v - c).norm() / r); };
  };

  for (int deg = 0; deg <= 6; ++deg)
    for (int p = deg; p >= 0; --p) {
      const int q = deg - p;
      TestFunction<2> t;
      t.name = "mono_" + std::to_string(p) + "_" + std::to_string(q);
      t.fn = mono(p, q);
      t.lipschitz = mono_lip(p, q);
      fam.members.push_back(std::move(t));
    }
  const double cw = (box.hi(0) - box.lo(0)) / 4.0, ch = (box.hi(1) - box.lo(1)) / 4.0;
  const double radius = 0.75 * std::hypot(cw, ch);
  std::vector<VecD<2>> centers;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) centers.emplace_back(box.lo(0) + (i + 0.5) * cw, box.lo(1) + (j + 0.5) * ch);
  for (std::size_t k = 0; k < centers.size(); ++k) {
    TestFunction<2> t;
    t.name = "bump_" + std::to_string(k);
    t.fn = bump(centers[k], radius);
    t.lipschitz = 1.0 / radius;
    fam.members.push_back(std::move(t));
  }
  {
    TestFunction<2> t;
    t.name = "dist_B";
    t.fn = dist;
    t.lipschitz = dist_lip;
    fam.members.push_back(std::move(t));
  }
  for (int deg = 0; deg <= 2; ++deg)
    for (int p = deg; p >= 0; --p) {
      const int q = deg - p;
      TestFunction<2> t;
      t.name = "dist_mono_" + std::to_string(p) + "_" + std::to_string(q);
      t.fn = [dist, m = mono(p, q)](const VecD<2>& v) { return dist(v) * m(v); };
      t.lipschitz = dist_lip + mono_lip(p, q);
      fam.members.push_back(std::move(t));
    }
  for (int k : {0, 5, 10, 15}) {
    TestFunction<2> t;
    t.name = "dist_bump_" + std::to_string(k);
    t.fn = [dist, b = bump(centers[k], radius)](const VecD<2>& v) { return dist(v) * b(v); };
    t.lipschitz = dist_lip + 1.0 / radius;
    fam.members.push_back(std::move(t));
  }
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  for (int m = 0; m < 10; ++m) {
    std::vector<VecD<2>> cs;
    std::vector<double> rs, ws;
    double norm = 0.0, lip = 0.0;
    for (int k = 0; k < 3; ++k) {
      cs.emplace_back(box.lo(0) + u01(rng) * (box.hi(0) - box.lo(0)),
                      box.lo(1) + u01(rng) * (box.hi(1) - box.lo(1)));
      rs.push_back((0.1 + 0.2 * u01(rng)) * diam);
      ws.push_back(m < 5 ? u01(rng) : 2.0 * u01(rng) - 1.0);
      norm += std::abs(ws.back());
    }
    for (int k = 0; k < 3; ++k) {
      ws[k] /= norm;
      lip += std::abs(ws[k]) / rs[k];
    }
    TestFunction<2> t;
    const bool vanish = (m % 2) == 1;
    t.name = std::string(vanish ? "random_bumps_dist_" : "random_bumps_") + std::to_string(m);
    t.fn = [cs, rs, ws, vanish, dist](const VecD<2>& v) {
      double s = 0.0;
      for (std::size_t k = 0; k < cs.size(); ++k) s += ws[k] * std::max(0.0, 1.0 - (v - cs[k]).norm() / rs[k]);
      return vanish ? s * dist(v) : s;
    };
    t.lipschitz = vanish ? lip + dist_lip : lip;
    fam.members.push_back(std::move(t));
  }

  for (auto& t : fam.members) {
    t.vanishes_on_B = std::all_of(B.begin(), B.end(), [&](const VecD<2>& b) { return t.fn(b) == 0.0; });
    bool pos = true;
    for (int i = 0; i <= 64 && pos; ++i)
      for (int j = 0; j <= 64 && pos; ++j) {
        const VecD<2> v(box.lo(0) + i * (box.hi(0) - box.lo(0)) / 64.0,
                        box.lo(1) + j * (box.hi(1) - box.lo(1)) / 64.0);
        pos = t.fn(v) >= 0.0;
      }
    t.positive = pos;
    t.sup_bound = 1.0;
  }
  return fam;
}

}  // namespace kmsf

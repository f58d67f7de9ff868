#include <doctest.h>

#include <random>
#include <set>

#include "helpers.hpp"
#include "kmsf/spatial_index.hpp"

using namespace kmsf;
using th::q;

namespace {

ContractionMap<Rational, 1> rmap(const Rational& a, const Rational& t) {
  Mat<Rational, 1> m;
  m << a;
  return {m, pt(t)};
}

ContractionMap<double, 1> dmap(double a, double t) {
  Mat<double, 1> m;
  m << a;
  return {m, th::d1(t)};
}

Box<1> unit() {
  Box<1> b;
  b.lo << 0.0;
  b.hi << 1.0;
  return b;
}

// independent oracle: the tent maps written out by hand
std::set<Rational> tent_level(const Rational& seed, int depth) {
  std::vector<Rational> level{seed};
  for (int n = 0; n < depth; ++n) {
    std::vector<Rational> next;
    for (const auto& y : level) {
      next.push_back(y / 2);
      next.push_back(1 - y / 2);
    }
    level = std::move(next);
  }
  return {level.begin(), level.end()};
}

}  // namespace

TEST_CASE("apply_word") {
  const auto t = tent();
  CHECK(apply_word(t.ifs, Word{{0}}, th::p1(1)) == th::p1(1, 2));
  CHECK(apply_word(t.ifs, Word{}, th::p1(3, 7)) == th::p1(3, 7));
  // outer letter applied last: gamma_1 gamma_2 (1/2) = (1 - 1/4)/2
  CHECK(apply_word(t.ifs, Word{{0, 1}}, th::p1(1, 2)) == th::p1(3, 8));
  CHECK_THROWS_AS(apply_word(t.ifs, Word{{2}}, th::p1(0)), std::out_of_range);

  const auto g = sierpinski();
  CHECK(apply_word(g.ifs, Word{{1}}, gasket::c(3)) == gasket::c(2));
}

TEST_CASE("contraction ratios") {
  const auto r = rmap(q(1, 2), 0).ratios();
  CHECK(r.lower == doctest::Approx(0.5));
  CHECK(r.upper == doctest::Approx(0.5));
  const auto g = sierpinski();
  CHECK(g.ifs.maps()[1].ratios().lower == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(g.ifs.maps()[1].ratios().upper == doctest::Approx(0.5).epsilon(1e-14));
  const auto near = dmap(0.99, 0.0).ratios();
  CHECK(near.proper());
  CHECK(near.near_unit);
  CHECK_THROWS_AS(rmap(0, 0), NotProperContractionError);
  CHECK_THROWS_AS(rmap(1, 0), NotProperContractionError);
  Mat<double, 2> sing;
  sing << 0.5, 0.5, 0.25, 0.25;
  CHECK_THROWS_AS((ContractionMap<double, 2>(sing, th::d2(0, 0))), NotProperContractionError);
}

TEST_CASE("attractor_approx examples") {
  const auto t = tent();
  const auto cloud = attractor_approx(t.ifs, 10, th::p1(0));
  CHECK(cloud.points.size() == 1024);
  CHECK(cloud.resolution <= std::pow(0.5, 10) * 1.0000001);
  std::set<Rational> pts;
  for (const auto& p : cloud.points) pts.insert(p(0));
  CHECK(pts == tent_level(0, 10));
  for (const auto& x : pts) CHECK(denominator(x * 1024) == 1);

  const auto d = doubling();
  std::set<Rational> dpts;
  for (const auto& p : attractor_approx(d.ifs, 3, th::p1(0)).points) dpts.insert(p(0));
  std::set<Rational> eighths;
  for (int k = 0; k < 8; ++k) eighths.insert(q(k, 8));
  CHECK(dpts == eighths);

  const auto g = sierpinski();
  const auto c1 = attractor_approx(g.ifs, 1, g.natural_seed);
  REQUIRE(c1.points.size() == 3);
  // one point per sub-triangle: the images of the centroid are pairwise distinct
  CHECK(c1.points[0] != c1.points[1]);
  CHECK(c1.points[1] != c1.points[2]);
  CHECK(c1.points[0] != c1.points[2]);
  for (const auto& p : c1.points) CHECK(gasket::in_triangle(p));

  CHECK_THROWS_AS(attractor_approx(t.ifs, 40, th::p1(0)), BudgetError);
  CHECK_THROWS_AS(attractor_approx(t.ifs, 0, th::p1(0)), DomainError);
}

TEST_CASE("dyadic attractor approximations from 0") {
  // tent: gamma_2(0) = 1, so level n is {k / 2^(n-1)}, 0 <= k <= 2^(n-1), with repeats
  // doubling: level n is {k / 2^n}, 0 <= k < 2^n, all distinct
  for (int n = 1; n <= 8; ++n) {
    std::set<Rational> a, b, want_a, want_b;
    const auto tc = attractor_approx(tent().ifs, n, th::p1(0));
    for (const auto& p : tc.points) a.insert(p(0));
    for (const auto& p : attractor_approx(doubling().ifs, n, th::p1(0)).points) b.insert(p(0));
    for (long k = 0; k <= (1L << (n - 1)); ++k) want_a.insert(th::q(k, 1L << (n - 1)));
    for (long k = 0; k < (1L << n); ++k) want_b.insert(th::q(k, 1L << n));
    CHECK(a == want_a);
    CHECK(b == want_b);
  }
}

TEST_CASE("check_self_similar") {
  const auto t = tent();
  const auto cloud = attractor_approx(t.ifs, 12, th::p1(0));
  const auto v = check_self_similar(t.ifs, cloud.as_double(), cloud.resolution, 1e-3);
  CHECK(v.pass);
  CHECK(v.defect <= std::pow(2.0, -12) + 1e-3);

  // images escape the clipped box
  IfsSystem<double, 1> bad({dmap(0.5, 0.0), dmap(0.5, 0.9)}, unit(), "bad");
  const auto bc = attractor_approx(bad, 10, th::d1(0.0));
  CHECK_FALSE(check_self_similar(bad, bc.as_double(), bc.resolution, 1e-3).pass);

  // a single fixed point is not the attractor
  const std::vector<VecD<1>> single{th::d1(0.0)};
  CHECK_FALSE(check_self_similar(t.ifs, single, 0.0, 1e-3).pass);
  const auto g = sierpinski();
  const std::vector<VecD<2>> single2{th::d2(0.0, 0.0)};
  CHECK_FALSE(check_self_similar(g.ifs, single2, 0.0, 1e-3).pass);
}

TEST_CASE("open set condition") {
  const auto t = tent();
  CHECK(check_open_set_condition(t.ifs, open_interval<Rational>(0, 1), 100000).pass);

  IfsSystem<Rational, 1> overlap({rmap(q(1, 2), 0), rmap(q(1, 2), q(1, 4))}, unit(), "overlap");
  const auto v = check_open_set_condition(overlap, open_interval<Rational>(0, 1), 2000);
  REQUIRE_FALSE(v.pass);
  bool inside = false;
  for (const auto& w : v.witnesses)
    if (w.kind == "overlap" && w.image(0) > 0.25 && w.image(0) < 0.5) inside = true;
  CHECK(inside);

  const auto g = sierpinski();
  CHECK(check_open_set_condition(g.ifs, g.open_set, 20000).pass);
}

TEST_CASE("word contraction bounds hold for sampled pairs") {
  const auto g = sierpinski().ifs.cast<double>();
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 1 + trial % 6;
    Word w = word_at(rng() % 729, n, 3);
    const VecD<2> y = th::d2(u(rng), u(rng) * 0.8), z = th::d2(u(rng), u(rng) * 0.8);
    const double d = (y - z).norm();
    const double dw = (apply_word(g, w, y) - apply_word(g, w, z)).norm();
    CHECK(dw <= std::pow(g.c2_max(), n) * d * (1 + 1e-12));
    CHECK(dw >= std::pow(g.c1_min(), n) * d * (1 - 1e-12));
  }
}

TEST_CASE("successive attractor approximations are close, with no isolated points") {
  const auto g = sierpinski();
  const double diam = g.ifs.box().diameter();
  for (std::size_t n = 1; n <= 6; ++n) {
    const auto a = attractor_approx(g.ifs, n, g.natural_seed).as_double();
    const auto b = attractor_approx(g.ifs, n + 1, g.natural_seed).as_double();
    CHECK(hausdorff_distance<2>(a, b) <= std::pow(0.5, n) * diam);
    for (std::size_t i = 0; i < a.size(); ++i) {
      double best = std::numeric_limits<double>::infinity();
      for (std::size_t k = 0; k < a.size(); ++k)
        if (k != i) best = std::min(best, (a[k] - a[i]).norm());
      CHECK(best <= 2.0 * std::pow(0.5, n) * diam);
    }
  }
}

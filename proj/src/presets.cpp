#include "kmsf/presets.hpp"

#include <random>

namespace kmsf {

namespace {

ContractionMap<Rational, 1> affine1(const Rational& a, const Rational& t) {
  Mat<Rational, 1> m;
  m << a;
  return {m, pt(t)};
}

Box<1> unit_interval() {
  Box<1> b;
  b.lo << 0.0;
  b.hi << 1.0;
  return b;
}

template <class S, int D>
std::string render(const Vec<S, D>& p) {
  std::string s = "(";
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    if (i) s += ",";
    s += scalar_traits<S>::to_string(p(i));
  }
  return s + ")";
}

template <class S, int D>
std::string render_set(const std::vector<Vec<S, D>>& pts) {
  std::string s = "{";
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (i) s += ",";
    s += render<S, D>(pts[i]);
  }
  return s + "}";
}

template <class S, int D>
BranchReport<S, D> make_expected(std::vector<BranchPair<S, D>> pairs,
                                 std::vector<Vec<S, D>> c_tilde) {
  BranchReport<S, D> r;
  r.pairs = std::move(pairs);
  for (const auto& p : r.pairs) {
    r.branch_values.push_back(p.y);
    r.branch_points.push_back(p.x);
  }
  detail::sort_points(r.branch_values);
  detail::sort_points(r.branch_points);
  std::sort(r.pairs.begin(), r.pairs.end(), [](const auto& a, const auto& b) {
    if (point_less<S, D>(a.y, b.y)) return true;
    if (point_less<S, D>(b.y, a.y)) return false;
    return point_less<S, D>(a.x, b.x);
  });
  r.c_tilde = std::move(c_tilde);
  detail::sort_points(r.c_tilde);
  return r;
}

template <class S, int D>
bool same_report(const BranchReport<S, D>& a, const BranchReport<S, D>& b) {
  if (a.branch_values != b.branch_values || a.branch_points != b.branch_points ||
      a.c_tilde != b.c_tilde || a.pairs.size() != b.pairs.size() ||
      a.finite_branch != b.finite_branch)
    return false;
  for (std::size_t i = 0; i < a.pairs.size(); ++i)
    if (a.pairs[i].y != b.pairs[i].y || a.pairs[i].x != b.pairs[i].x ||
        a.pairs[i].maps != b.pairs[i].maps)
      return false;
  return true;
}

template <class S, int D>
void verify_report(const Preset<S, D>& p) {
  const auto computed = branch_values(p.ifs);
  if (!same_report(computed, p.expected))
    throw PresetIntegrityError(p.name + ": computed branch report " +
                               render_set<S, D>(computed.branch_values) + " -> " +
                               render_set<S, D>(computed.branch_points) +
                               " differs from the expected one");
}

Preset<Rational, 1> interval_preset(std::string name, std::vector<ContractionMap<Rational, 1>> maps,
                                    BranchReport<Rational, 1> expected,
                                    std::vector<KnownFact> facts) {
  IfsSystem<Rational, 1> ifs(std::move(maps), unit_interval(), name);
  ifs = ifs.with_membership([](const Point1& y) { return y(0) >= 0 && y(0) <= 1; });
  Preset<Rational, 1> p{name, std::move(ifs), std::move(expected), std::move(facts),
                        open_interval<Rational>(Rational(0), Rational(1)), pt(Rational(1, 2))};
  verify_report(p);
  return p;
}

}  // namespace

Preset<Rational, 1> tent() {
  std::vector<ContractionMap<Rational, 1>> maps{affine1(Rational(1, 2), 0),
                                                affine1(Rational(-1, 2), 1)};
  auto expected = make_expected<Rational, 1>({{pt(1), pt(Rational(1, 2)), {0, 1}}}, {pt(1)});
  return interval_preset("tent", std::move(maps), std::move(expected),
                         {{"C", "{1}"}, {"B", "{1/2}"}, {"e(1/2,1)", "2"}, {"min_beta", "log 2"}});
}

Preset<Rational, 1> doubling() {
  std::vector<ContractionMap<Rational, 1>> maps{affine1(Rational(1, 2), 0),
                                                affine1(Rational(1, 2), Rational(1, 2))};
  return interval_preset("doubling", std::move(maps), make_expected<Rational, 1>({}, {}),
                         {{"C", "{}"}, {"B", "{}"}, {"min_beta", "log 2"}});
}

namespace gasket {

namespace {
QSqrt3 q(long p, long d = 1) { return QSqrt3(Rational(p, d)); }
QSqrt3 r3(long p, long d) { return QSqrt3(Rational(0), Rational(p, d)); }
}  // namespace

Point2 c(int i) {
  switch (i) {
    case 1: return pt(q(1, 2), r3(1, 2));
    case 2: return pt(q(0), q(0));
    case 3: return pt(q(1), q(0));
  }
  throw std::out_of_range("gasket vertex index must be 1..3");
}

Point2 b(int i) {
  switch (i) {
    case 1: return pt(q(1, 4), r3(1, 4));
    case 2: return pt(q(3, 4), r3(1, 4));
    case 3: return pt(q(1, 2), q(0));
  }
  throw std::out_of_range("gasket midpoint index must be 1..3");
}

bool in_triangle(const Point2& p) {
  const QSqrt3 s3 = QSqrt3::sqrt3();
  const QSqrt3& x = p(0);
  const QSqrt3& y = p(1);
  return y.sign() >= 0 && (s3 * x - y).sign() >= 0 && (s3 * (q(1) - x) - y).sign() >= 0;
}

bool in_attractor(const IfsSystem<QSqrt3, 2>& ifs, const Point2& p0, int depth) {
  if (!in_triangle(p0)) return false;
  Point2 p = p0;
  for (int level = 0; level < depth; ++level) {
    if (p == c(1) || p == c(2) || p == c(3)) return true;
    bool moved = false;
    for (const auto& m : ifs.maps()) {
      const auto pre = m.preimage(p);
      if (pre && in_triangle(*pre)) {
        p = *pre;
        moved = true;
        break;
      }
    }
    if (!moved) return false;
  }
  return true;
}

}  // namespace gasket

Preset<QSqrt3, 2> sierpinski() {
  using gasket::b;
  using gasket::c;
  using gasket::q;
  using gasket::r3;
  Mat<QSqrt3, 2> half;
  half << q(1, 2), q(0), q(0), q(1, 2);
  Mat<QSqrt3, 2> rot_minus;  // (1/2) R(-120 deg)
  rot_minus << q(-1, 4), r3(1, 4), r3(-1, 4), q(-1, 4);
  Mat<QSqrt3, 2> rot_plus;  // (1/2) R(+120 deg)
  rot_plus << q(-1, 4), r3(-1, 4), r3(1, 4), q(-1, 4);
  std::vector<ContractionMap<QSqrt3, 2>> maps{{half, b(1)}, {rot_minus, b(1)}, {rot_plus, c(3)}};

  Box<2> box;
  box.lo << 0.0, 0.0;
  box.hi << 1.0, std::sqrt(3.0) / 2.0;
  IfsSystem<QSqrt3, 2> raw(std::move(maps), box, "sierpinski");
  const IfsSystem<QSqrt3, 2> probe = raw;
  IfsSystem<QSqrt3, 2> ifs =
      raw.with_membership([probe](const Point2& p) { return gasket::in_attractor(probe, p, 40); });

  auto expected = make_expected<QSqrt3, 2>(
      {{c(2), b(1), {0, 1}}, {c(3), b(2), {0, 2}}, {c(1), b(3), {1, 2}}}, {c(1), c(2), c(3)});

  // S minus its vertices
  OpenSet<QSqrt3, 2> v;
  v.name = "S\\{c1,c2,c3}";
  v.contains = [](const Point2& p) {
    return gasket::in_triangle(p) && p != c(1) && p != c(2) && p != c(3);
  };
  v.sample = [](std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double s = u(rng), t = u(rng);
    if (s + t > 1.0) {
      s = 1.0 - s;
      t = 1.0 - t;
    }
    const VecD<2> a(0.5, std::sqrt(3.0) / 2.0), b2(0.0, 0.0), c3(1.0, 0.0);
    const VecD<2> centroid = (a + b2 + c3) / 3.0;
    const VecD<2> p = b2 + s * (c3 - b2) + t * (a - b2);
    return VecD<2>(centroid + (1.0 - 1e-9) * (p - centroid));
  };

  Preset<QSqrt3, 2> p{"sierpinski",
                      std::move(ifs),
                      std::move(expected),
                      {{"C", "{c1,c2,c3}"},
                       {"B", "{b1,b2,b3}"},
                       {"inverse(c1)", "{c1}"},
                       {"inverse(c2)", "{c3}"},
                       {"inverse(c3)", "{c2}"},
                       {"min_beta", "log 3"}},
                      std::move(v),
                      pt(q(1, 2), r3(1, 6))};

  // Every stated vertex fact is checked before the preset is handed out.
  auto fail = [](const std::string& what) {
    throw PresetIntegrityError("sierpinski: " + what);
  };
  const auto& g = p.ifs.maps();
  if (g[0](c(2)) != b(1) || g[1](c(2)) != b(1)) fail("gamma_1(c2) = gamma_2(c2) = b1");
  if (g[0](c(3)) != b(2) || g[2](c(3)) != b(2)) fail("gamma_1(c3) = gamma_3(c3) = b2");
  if (g[1](c(1)) != b(3) || g[2](c(1)) != b(3)) fail("gamma_2(c1) = gamma_3(c1) = b3");
  const std::pair<int, int> inverse_facts[] = {{1, 1}, {2, 3}, {3, 2}};
  for (auto [target, source] : inverse_facts) {
    const auto pre = inverse_images(p.ifs, c(target));
    if (pre.size() != 1 || pre[0].y != c(source))
      fail("inverse image of c" + std::to_string(target) + " is not {c" +
           std::to_string(source) + "}");
  }
  verify_report(p);
  return p;
}

bool is_preset_name(const std::string& name) {
  return name == "tent" || name == "doubling" || name == "sierpinski";
}

}  // namespace kmsf

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/SVD>

#include "kmsf/error.hpp"
#include "kmsf/linalg.hpp"
#include "kmsf/spatial_index.hpp"

namespace kmsf {

inline constexpr std::size_t kDefaultAtomBudget = std::size_t{1} << 22;

struct Ratios {
  double lower = 0.0;
  double upper = 0.0;
  bool estimated = false;
  bool near_unit = false;

  bool proper() const { return lower > 0.0 && lower <= upper && upper < 1.0; }
};

inline constexpr double kNearUnitRatio = 0.95;

// Singular-value bounds of a linear part. Throws on a singular matrix.
template <class S, int D>
Ratios contraction_ratios(const Mat<S, D>& a) {
  const Mat<double, D> m = to_double_matrix<S, D>(a);
  if constexpr (is_exact_v<S>) {
    if (!field_inverse<S, D>(a)) throw NotProperContractionError("linear part is singular");
  }
  const Eigen::MatrixXd md = m;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(md);
  const auto& sv = svd.singularValues();
  Ratios r;
  r.upper = sv.maxCoeff();
  r.lower = sv.minCoeff();
  if (r.lower <= 1e-14 * std::max(1.0, r.upper))
    throw NotProperContractionError("linear part is singular");
  r.near_unit = r.upper >= kNearUnitRatio;
  return r;
}

struct WordTag {};

// A finite word (j_1, ..., j_n) over {0, ..., N-1}; it denotes the composition
// gamma_{j_1} o ... o gamma_{j_n}. Printed 1-based.
struct Word {
  std::vector<int> letters;

  std::size_t size() const { return letters.size(); }
  bool empty() const { return letters.empty(); }

  std::string to_string() const {
    std::string s;
    for (std::size_t i = 0; i < letters.size(); ++i) {
      if (i) s += '.';
      s += std::to_string(letters[i] + 1);
    }
    return s;
  }

  friend bool operator==(const Word&, const Word&) = default;
  friend auto operator<=>(const Word&, const Word&) = default;
};

// The lexicographically i-th word of length `length` over N letters.
inline Word word_at(std::size_t index, std::size_t length, std::size_t n_maps) {
  Word w;
  w.letters.assign(length, 0);
  for (std::size_t pos = length; pos-- > 0;) {
    w.letters[pos] = static_cast<int>(index % n_maps);
    index /= n_maps;
  }
  return w;
}

template <int D>
struct Box {
  VecD<D> lo;
  VecD<D> hi;

  int dim() const { return static_cast<int>(lo.size()); }
  double diameter() const { return (hi - lo).norm(); }
  VecD<D> center() const { return (lo + hi) / 2.0; }
  bool contains(const VecD<D>& p, double slack = 0.0) const {
    for (int i = 0; i < dim(); ++i)
      if (p(i) < lo(i) - slack || p(i) > hi(i) + slack) return false;
    return true;
  }
};

template <class S, int D>
class ContractionMap {
 public:
  using Point = Vec<S, D>;
  using Matrix = Mat<S, D>;
  using Fn = std::function<Point(const Point&)>;

  ContractionMap(Matrix a, Point t) : a_(std::move(a)), t_(std::move(t)) {
    if (a_.rows() != t_.size()) throw ShapeError("matrix and translation sizes differ");
    ratios_ = contraction_ratios<S, D>(a_);
    if (!ratios_.proper())
      throw NotProperContractionError("ratio bounds (" + format_double(ratios_.lower) + ", " +
                                      format_double(ratios_.upper) + ") not inside (0,1)");
    auto inv = field_inverse<S, D>(a_);
    if (!inv) throw NotProperContractionError("linear part is singular");
    inverse_ = std::move(*inv);
  }

  // Non-affine map given by a closure. Ratio bounds are estimated from sampled
  // difference quotients over `box`.
  static ContractionMap callable(Fn f, const Box<D>& box, std::optional<Fn> inverse = std::nullopt,
                                 int samples = 2000, std::uint64_t seed = 7) {
    static_assert(!is_exact_v<S>, "callable maps are floating point only");
    ContractionMap m;
    m.fn_ = std::move(f);
    m.inv_fn_ = std::move(inverse);
    m.dim_ = box.dim();
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    auto draw = [&] {
      VecD<D> p(box.dim());
      for (int i = 0; i < box.dim(); ++i) p(i) = box.lo(i) + u(rng) * (box.hi(i) - box.lo(i));
      return p;
    };
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
    for (int s = 0; s < samples; ++s) {
      const VecD<D> p = draw(), q = draw();
      const double d = (p - q).norm();
      if (d < 1e-12) continue;
      const double ratio = (m.fn_(p) - m.fn_(q)).norm() / d;
      lo = std::min(lo, ratio);
      hi = std::max(hi, ratio);
    }
    m.ratios_ = {lo, hi, true, hi >= kNearUnitRatio};
    if (!m.ratios_.proper())
      throw NotProperContractionError("estimated ratio bounds not inside (0,1)");
    return m;
  }

  bool affine() const { return !fn_; }
  int dim() const { return affine() ? static_cast<int>(t_.size()) : dim_; }
  const Matrix& matrix() const { return a_; }
  const Point& translation() const { return t_; }
  const Ratios& ratios() const { return ratios_; }

  Point operator()(const Point& y) const {
    if (fn_) return fn_(y);
    return a_ * y + t_;
  }

  // gamma^{-1}(x) in R^d (membership in K is checked by the caller).
  std::optional<Point> preimage(const Point& x) const {
    if (fn_) {
      if (inv_fn_) return (*inv_fn_)(x);
      return std::nullopt;
    }
    return Point(inverse_ * (x - t_));
  }

  template <class T>
  ContractionMap<T, D> cast() const {
    if (fn_) {
      if constexpr (std::is_same_v<T, S>) return *this;
      throw ConfigurationError("callable maps cannot change scalar type");
    } else {
      Mat<T, D> a(a_.rows(), a_.cols());
      Vec<T, D> t(t_.size());
      for (Eigen::Index i = 0; i < a_.rows(); ++i) {
        t(i) = convert<T>(t_(i));
        for (Eigen::Index j = 0; j < a_.cols(); ++j) a(i, j) = convert<T>(a_(i, j));
      }
      return ContractionMap<T, D>(std::move(a), std::move(t));
    }
  }

 private:
  template <class T>
  static T convert(const S& x) {
    if constexpr (std::is_same_v<T, S>) return x;
    else if constexpr (std::is_same_v<T, double>) return to_double(x);
    else return T(x);
  }

  ContractionMap() = default;

  Matrix a_;
  Point t_;
  Matrix inverse_;
  Ratios ratios_;
  Fn fn_;
  std::optional<Fn> inv_fn_;
  int dim_ = 0;
};

struct Membership {
  bool inside = false;
  bool approximate = false;
};

// Point cloud approximating K, kept in floating point with its resolution.
template <int D>
struct AttractorSample {
  std::shared_ptr<const GridIndex<D>> index;
  double resolution = 0.0;
};

template <class S, int D>
class IfsSystem {
 public:
  using Point = Vec<S, D>;
  using MembershipFn = std::function<bool(const Point&)>;

  IfsSystem(std::vector<ContractionMap<S, D>> maps, Box<D> box, std::string name = "user")
      : maps_(std::move(maps)), box_(std::move(box)), name_(std::move(name)) {
    if (maps_.size() < 2) throw ConfigurationError("an IFS needs at least two maps");
    for (const auto& m : maps_)
      if (m.dim() != box_.dim()) throw ShapeError("map dimension differs from box dimension");
  }

  std::size_t size() const { return maps_.size(); }
  int dim() const { return box_.dim(); }
  const std::vector<ContractionMap<S, D>>& maps() const { return maps_; }
  const ContractionMap<S, D>& map(std::size_t j) const {
    if (j >= maps_.size()) throw std::out_of_range("map index " + std::to_string(j + 1) +
                                                   " outside 1.." + std::to_string(maps_.size()));
    return maps_[j];
  }
  const Box<D>& box() const { return box_; }
  const std::string& name() const { return name_; }
  bool all_affine() const {
    return std::all_of(maps_.begin(), maps_.end(), [](const auto& m) { return m.affine(); });
  }

  double c2_max() const {
    double c = 0.0;
    for (const auto& m : maps_) c = std::max(c, m.ratios().upper);
    return c;
  }
  double c1_min() const {
    double c = 1.0;
    for (const auto& m : maps_) c = std::min(c, m.ratios().lower);
    return c;
  }

  Point apply(std::size_t j, const Point& y) const { return map(j)(y); }

  IfsSystem with_membership(MembershipFn fn) const {
    IfsSystem copy = *this;
    copy.exact_membership_ = std::move(fn);
    return copy;
  }
  IfsSystem with_sample(AttractorSample<D> sample) const {
    IfsSystem copy = *this;
    copy.sample_ = std::move(sample);
    return copy;
  }
  IfsSystem with_name(std::string name) const {
    IfsSystem copy = *this;
    copy.name_ = std::move(name);
    return copy;
  }

  bool has_exact_membership() const { return static_cast<bool>(exact_membership_); }
  const std::optional<AttractorSample<D>>& sample() const { return sample_; }

  // Membership in the attractor K: exact when an oracle is attached, otherwise
  // within twice the sample resolution, otherwise only the box test.
  Membership contains(const Point& y) const {
    if (exact_membership_) return {exact_membership_(y), false};
    const VecD<D> p = to_double(y);
    if (sample_) {
      const double d = sample_->index->nearest_distance(p);
      return {d <= 2.0 * sample_->resolution + 1e-12 * box_.diameter(), true};
    }
    return {box_.contains(p, 1e-12 * box_.diameter()), true};
  }

  // Tolerance under which two floating points are identified.
  double collision_tolerance() const { return 1e-9 * box_.diameter(); }

  template <class T>
  IfsSystem<T, D> cast() const {
    std::vector<ContractionMap<T, D>> maps;
    maps.reserve(maps_.size());
    for (const auto& m : maps_) maps.push_back(m.template cast<T>());
    IfsSystem<T, D> out(std::move(maps), box_, name_);
    if constexpr (std::is_same_v<T, S>) {
      if (exact_membership_) out = out.with_membership(exact_membership_);
    }
    if (sample_) out = out.with_sample(*sample_);
    return out;
  }

 private:
  std::vector<ContractionMap<S, D>> maps_;
  Box<D> box_;
  std::string name_;
  MembershipFn exact_membership_;
  std::optional<AttractorSample<D>> sample_;
};

template <class S, int D>
Vec<S, D> apply_word(const IfsSystem<S, D>& ifs, const Word& w, const Vec<S, D>& y) {
  Vec<S, D> p = y;
  for (std::size_t i = w.size(); i-- > 0;) {
    const int j = w.letters[i];
    if (j < 0 || static_cast<std::size_t>(j) >= ifs.size())
      throw std::out_of_range("word letter " + std::to_string(j + 1) + " outside 1.." +
                              std::to_string(ifs.size()));
    p = ifs.maps()[static_cast<std::size_t>(j)](p);
  }
  return p;
}

inline std::size_t checked_power(std::size_t base, std::size_t exp, std::size_t budget) {
  std::size_t v = 1;
  for (std::size_t i = 0; i < exp; ++i) {
    if (v > budget / base) return budget + 1;
    v *= base;
  }
  return v;
}

template <class S, int D>
struct AttractorCloud {
  std::vector<Vec<S, D>> points;  // lexicographic word order
  std::size_t depth = 0;
  std::size_t n_maps = 0;
  double resolution = 0.0;

  Word word(std::size_t i) const { return word_at(i, depth, n_maps); }
  std::vector<VecD<D>> as_double() const {
    std::vector<VecD<D>> out;
    out.reserve(points.size());
    for (const auto& p : points) out.push_back(to_double(p));
    return out;
  }
};

// All images of `seed` under words of length `depth`.
template <class S, int D>
AttractorCloud<S, D> attractor_approx(const IfsSystem<S, D>& ifs, std::size_t depth,
                                      const Vec<S, D>& seed,
                                      std::size_t budget = kDefaultAtomBudget) {
  if (depth < 1) throw DomainError("attractor depth must be >= 1");
  const std::size_t count = checked_power(ifs.size(), depth, budget);
  if (count > budget)
    throw BudgetError("N^depth = " + std::to_string(ifs.size()) + "^" + std::to_string(depth) +
                      " exceeds the atom budget " + std::to_string(budget) +
                      "; use chaos_game sampling instead");
  std::vector<Vec<S, D>> level{seed};
  for (std::size_t n = 0; n < depth; ++n) {
    std::vector<Vec<S, D>> next;
    next.reserve(level.size() * ifs.size());
    for (std::size_t j = 0; j < ifs.size(); ++j)
      for (const auto& p : level) next.push_back(ifs.maps()[j](p));
    level = std::move(next);
  }
  AttractorCloud<S, D> cloud;
  cloud.points = std::move(level);
  cloud.depth = depth;
  cloud.n_maps = ifs.size();
  cloud.resolution = ifs.box().diameter() * std::pow(ifs.c2_max(), static_cast<double>(depth));
  return cloud;
}

// Attaches a sample of K (for approximate membership tests) to the system.
template <class S, int D>
IfsSystem<S, D> with_attractor_sample(const IfsSystem<S, D>& ifs, std::size_t depth) {
  const auto cloud = attractor_approx(ifs.template cast<double>(), depth,
                                      VecD<D>(ifs.box().center()));
  AttractorSample<D> sample{std::make_shared<GridIndex<D>>(cloud.as_double()), cloud.resolution};
  return ifs.with_sample(std::move(sample));
}

struct SelfSimilarityVerdict {
  double defect = 0.0;
  double resolution = 0.0;
  double eps = 0.0;
  std::size_t escaped = 0;
  bool pass = false;
};

// Hausdorff defect between the cloud and the union of its images, plus a box
// containment test for the images.
template <class S, int D>
SelfSimilarityVerdict check_self_similar(const IfsSystem<S, D>& ifs,
                                         const std::vector<VecD<D>>& cloud, double resolution,
                                         double eps) {
  if (cloud.empty()) throw DomainError("self-similarity check needs a nonempty cloud");
  const auto fifs = ifs.template cast<double>();
  std::vector<VecD<D>> images;
  images.reserve(cloud.size() * fifs.size());
  for (const auto& m : fifs.maps())
    for (const auto& p : cloud) images.push_back(m(p));
  SelfSimilarityVerdict v;
  v.resolution = resolution;
  v.eps = eps;
  v.defect = hausdorff_distance<D>(cloud, images);
  const double slack = eps + resolution;
  for (const auto& q : images)
    if (!fifs.box().contains(q, slack)) ++v.escaped;
  v.pass = v.escaped == 0 && v.defect <= eps + resolution;
  return v;
}

// Open set descriptor: an exact membership predicate plus a sampler.
template <class S, int D>
struct OpenSet {
  std::string name;
  std::function<bool(const Vec<S, D>&)> contains;
  std::function<VecD<D>(std::mt19937_64&)> sample;
};

template <class S>
OpenSet<S, 1> open_interval(const S& lo, const S& hi) {
  OpenSet<S, 1> v;
  v.name = "(" + scalar_traits<S>::to_string(lo) + "," + scalar_traits<S>::to_string(hi) + ")";
  v.contains = [lo, hi](const Vec<S, 1>& p) { return lo < p(0) && p(0) < hi; };
  const double a = to_double(lo), b = to_double(hi);
  v.sample = [a, b](std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(a, b);
    double x = u(rng);
    while (x <= a || x >= b) x = u(rng);
    VecD<1> p;
    p << x;
    return p;
  };
  return v;
}

template <int D>
struct OscWitness {
  std::string kind;  // "escape" or "overlap"
  int map_a = -1;
  int map_b = -1;
  VecD<D> sample;
  VecD<D> image;
};

template <int D>
struct OscVerdict {
  bool pass = false;
  std::size_t samples = 0;
  bool overlap_tested = true;
  std::vector<OscWitness<D>> witnesses;
};

// Sampled open set condition. A FAIL carries a concrete witness and is
// reliable; a PASS only means no witness was found.
template <class S, int D>
OscVerdict<D> check_open_set_condition(const IfsSystem<S, D>& ifs, const OpenSet<S, D>& v,
                                       std::size_t samples, std::uint64_t seed = 1,
                                       std::size_t max_witnesses = 8) {
  if (!v.contains || !v.sample) throw ConfigurationError("open set needs predicate and sampler");
  std::mt19937_64 rng(seed);
  OscVerdict<D> out;
  out.samples = samples;
  for (std::size_t s = 0; s < samples && out.witnesses.size() < max_witnesses; ++s) {
    VecD<D> pd;
    try {
      pd = v.sample(rng);
    } catch (const std::exception& e) {
      throw ConfigurationError(std::string("open set sampler failed: ") + e.what());
    }
    const Vec<S, D> p = from_double<S, D>(pd);
    if (!v.contains(p)) throw ConfigurationError("open set sampler produced a point outside V");
    for (std::size_t j = 0; j < ifs.size(); ++j) {
      const Vec<S, D> q = ifs.maps()[j](p);
      if (!v.contains(q)) {
        out.witnesses.push_back({"escape", static_cast<int>(j), -1, pd, to_double(q)});
        continue;
      }
      for (std::size_t k = 0; k < ifs.size(); ++k) {
        if (k == j) continue;
        const auto r = ifs.maps()[k].preimage(q);
        if (!r) {
          out.overlap_tested = false;
          continue;
        }
        if (v.contains(*r)) {
          out.witnesses.push_back({"overlap", static_cast<int>(j), static_cast<int>(k), pd,
                                   to_double(q)});
          break;
        }
      }
    }
  }
  out.pass = out.witnesses.empty();
  return out;
}

}  // namespace kmsf

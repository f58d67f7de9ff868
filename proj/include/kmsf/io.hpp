#pragma once

#include <filesystem>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "kmsf/ifs.hpp"
#include "kmsf/measure.hpp"

namespace kmsf {

using Json = nlohmann::ordered_json;

inline constexpr int kSchemaVersion = 1;

// temp file in the same directory, then rename
void write_file_atomic(const std::filesystem::path& path, const std::string& content);
std::string read_file(const std::filesystem::path& path);

// ---- exact scalars in JSON: {"rat": [p, q]} with optional "sqrt3_coeff": [p, q]
Json rational_pair(const Rational& r);
Json scalar_to_json(double x);
Json scalar_to_json(const Rational& x);
Json scalar_to_json(const QSqrt3& x);

// Accepts a number, a "p/q" string, or the {"rat", "sqrt3_coeff"} object.
QSqrt3 scalar_from_json(const Json& j);

// Exact values as strings ("p/q", "a+b*sqrt3"); doubles as JSON numbers.
Json exact_or_number(double x);
Json exact_or_number(const Rational& x);
Json exact_or_number(const QSqrt3& x);

// ---- IFS files
//   {"schema": 1, "name": ..., "dim": d, "arithmetic": "exact" | "double",
//    "box": {"lo": [...], "hi": [...]},
//    "maps": [{"A": [[...], ...], "t": [...]}, ...]}
// Exact systems load as rational (d = 1) or a + b sqrt3 (d = 2).
using AnySystem = std::variant<IfsSystem<Rational, 1>, IfsSystem<QSqrt3, 2>, IfsSystem<double, 1>,
                               IfsSystem<double, 2>>;

AnySystem ifs_from_json(const Json& j);
AnySystem load_ifs(const std::filesystem::path& path);

template <class S, int D>
Json ifs_to_json(const IfsSystem<S, D>& ifs) {
  if (!ifs.all_affine()) throw ConfigurationError("only affine systems can be exported");
  Json j;
  j["schema"] = kSchemaVersion;
  j["name"] = ifs.name();
  j["dim"] = ifs.dim();
  j["arithmetic"] = is_exact_v<S> ? "exact" : "double";
  Json lo = Json::array(), hi = Json::array();
  for (int i = 0; i < ifs.dim(); ++i) {
    lo.push_back(ifs.box().lo(i));
    hi.push_back(ifs.box().hi(i));
  }
  j["box"] = {{"lo", lo}, {"hi", hi}};
  Json maps = Json::array();
  for (const auto& m : ifs.maps()) {
    Json A = Json::array(), t = Json::array();
    for (Eigen::Index r = 0; r < m.matrix().rows(); ++r) {
      Json row = Json::array();
      for (Eigen::Index c = 0; c < m.matrix().cols(); ++c) row.push_back(scalar_to_json(m.matrix()(r, c)));
      A.push_back(row);
      t.push_back(scalar_to_json(m.translation()(r)));
    }
    maps.push_back({{"A", A}, {"t", t}});
  }
  j["maps"] = maps;
  return j;
}

std::string dump_json(const Json& j);

// ---- point and measure tables
template <int D>
std::string points_csv(const std::vector<VecD<D>>& pts, const std::vector<std::string>& labels = {}) {
  std::string s;
  const int dim = pts.empty() ? D : static_cast<int>(pts.front().size());
  s += dim == 1 ? "x" : "x,y";
  if (!labels.empty()) s += ",word";
  s += "\n";
  for (std::size_t i = 0; i < pts.size(); ++i) {
    for (int c = 0; c < dim; ++c) {
      if (c) s += ",";
      s += format_double(pts[i](c));
    }
    if (!labels.empty()) s += "," + labels[i];
    s += "\n";
  }
  return s;
}

// coordinates, weight, and for exact measures the exact coordinates and weight
template <class S, int D>
std::string measure_csv(const DiscreteMeasure<S, D>& m) {
  std::string s;
  const int dim = m.size() ? static_cast<int>(m.points.front().size()) : D;
  s += dim == 1 ? "x" : "x,y";
  s += ",weight";
  if constexpr (is_exact_v<S>) s += dim == 1 ? ",x_exact,weight_exact" : ",x_exact,y_exact,weight_exact";
  if (!m.labels.empty()) s += ",word";
  s += "\n";
  for (std::size_t i = 0; i < m.size(); ++i) {
    for (int c = 0; c < dim; ++c) s += (c ? "," : "") + format_double(to_double(m.points[i](c)));
    s += "," + format_double(weight_to_double(m.weights[i]));
    if constexpr (is_exact_v<S>) {
      for (int c = 0; c < dim; ++c) s += "," + scalar_traits<S>::to_string(m.points[i](c));
      s += "," + rational_to_string(m.weights[i]);
    }
    if (!m.labels.empty()) s += "," + m.labels[i];
    s += "\n";
  }
  return s;
}

template <class S, int D>
Json measure_json(const DiscreteMeasure<S, D>& m) {
  Json j;
  j["atoms"] = m.size();
  j["exact"] = is_exact_v<S>;
  j["total"] = exact_or_number(m.total());
  j["defect"] = exact_or_number(m.mass_defect);
  j["resolution"] = m.resolution;
  j["max_atom_weight"] = m.max_weight();
  return j;
}

// Scatter plot of a planar or linear cloud in a fixed 512x512 viewport.
template <int D>
std::string scatter_svg(const std::vector<VecD<D>>& pts, const Box<D>& box, const std::string& title);

extern template std::string scatter_svg<1>(const std::vector<VecD<1>>&, const Box<1>&, const std::string&);
extern template std::string scatter_svg<2>(const std::vector<VecD<2>>&, const Box<2>&, const std::string&);

}  // namespace kmsf

#include "kmsf/io.hpp"

#include <fstream>
#include <limits>
#include <sstream>

#include "kmsf/error.hpp"

namespace kmsf {

namespace fs = std::filesystem;

void write_file_atomic(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigurationError("cannot write " + tmp.string());
    out << content;
    if (!out.flush()) throw ConfigurationError("write failed for " + tmp.string());
  }
  fs::rename(tmp, path);
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigurationError("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string dump_json(const Json& j) { return j.dump(2) + "\n"; }

namespace {

Json integer_json(const boost::multiprecision::mpz_int& z) {
  if (z >= std::numeric_limits<long long>::min() && z <= std::numeric_limits<long long>::max())
    return z.convert_to<long long>();
  return z.str();
}

boost::multiprecision::mpz_int integer_from_json(const Json& j) {
  if (j.is_number_integer()) return boost::multiprecision::mpz_int(j.get<long long>());
  if (j.is_string()) return boost::multiprecision::mpz_int(j.get<std::string>());
  throw ConfigurationError("expected an integer, got " + j.dump());
}

Rational pair_from_json(const Json& j) {
  if (!j.is_array() || j.size() != 2) throw ConfigurationError("expected [p, q], got " + j.dump());
  const auto q = integer_from_json(j[1]);
  if (q == 0) throw ConfigurationError("zero denominator in " + j.dump());
  return Rational(integer_from_json(j[0]), q);
}

Rational rational_from_string(const std::string& s) {
  try {
    return Rational(s);
  } catch (const std::exception&) {
    throw ConfigurationError("not a rational: \"" + s + "\"");
  }
}

}  // namespace

Json rational_pair(const Rational& r) { return Json::array({integer_json(numerator(r)), integer_json(denominator(r))}); }

Json scalar_to_json(double x) { return x; }

Json scalar_to_json(const Rational& x) { return {{"rat", rational_pair(x)}}; }

Json scalar_to_json(const QSqrt3& x) {
  return {{"rat", rational_pair(x.rational_part())}, {"sqrt3_coeff", rational_pair(x.sqrt3_part())}};
}

QSqrt3 scalar_from_json(const Json& j) {
  if (j.is_number_integer()) return QSqrt3(Rational(j.get<long long>()));
  if (j.is_number()) return QSqrt3(Rational(j.get<double>()));
  if (j.is_string()) return QSqrt3(rational_from_string(j.get<std::string>()));
  if (j.is_object()) {
    Rational a = 0, b = 0;
    if (j.contains("rat")) a = pair_from_json(j.at("rat"));
    if (j.contains("sqrt3_coeff")) b = pair_from_json(j.at("sqrt3_coeff"));
    for (const auto& [k, v] : j.items())
      if (k != "rat" && k != "sqrt3_coeff") throw ConfigurationError("unknown scalar field \"" + k + "\"");
    return {a, b};
  }
  throw ConfigurationError("cannot read a scalar from " + j.dump());
}

Json exact_or_number(double x) { return x; }
Json exact_or_number(const Rational& x) { return rational_to_string(x); }
Json exact_or_number(const QSqrt3& x) { return scalar_traits<QSqrt3>::to_string(x); }

namespace {

template <class S, int D>
IfsSystem<S, D> build(const Json& j, int dim, const std::string& name) {
  auto conv = [](const QSqrt3& q) -> S {
    if constexpr (std::is_same_v<S, double>) return q.to_double();
    else if constexpr (std::is_same_v<S, Rational>) {
      if (q.sqrt3_part() != 0) throw ConfigurationError("sqrt3 coefficients need an exact planar system");
      return q.rational_part();
    } else return q;
  };
  Box<D> box{VecD<D>(dim), VecD<D>(dim)};
  const auto& jb = j.at("box");
  if (jb.at("lo").size() != static_cast<std::size_t>(dim) || jb.at("hi").size() != static_cast<std::size_t>(dim))
    throw ConfigurationError("box corners must have dim entries");
  for (int i = 0; i < dim; ++i) {
    box.lo(i) = jb.at("lo")[i].get<double>();
    box.hi(i) = jb.at("hi")[i].get<double>();
    if (!(box.lo(i) < box.hi(i))) throw ConfigurationError("box must have lo < hi");
  }
  std::vector<ContractionMap<S, D>> maps;
  for (const auto& jm : j.at("maps")) {
    const auto& A = jm.at("A");
    const auto& t = jm.at("t");
    if (A.size() != static_cast<std::size_t>(dim) || t.size() != static_cast<std::size_t>(dim))
      throw ConfigurationError("map shape must match dim");
    Mat<S, D> a(dim, dim);
    Vec<S, D> v(dim);
    for (int r = 0; r < dim; ++r) {
      if (A[r].size() != static_cast<std::size_t>(dim)) throw ConfigurationError("map rows must have dim entries");
      for (int c = 0; c < dim; ++c) a(r, c) = conv(scalar_from_json(A[r][c]));
      v(r) = conv(scalar_from_json(t[r]));
    }
    maps.emplace_back(std::move(a), std::move(v));
  }
  return IfsSystem<S, D>(std::move(maps), std::move(box), name);
}

}  // namespace

AnySystem ifs_from_json(const Json& j) {
  try {
    if (!j.is_object()) throw ConfigurationError("IFS file must be a JSON object");
    if (j.contains("schema") && j.at("schema").get<int>() != kSchemaVersion)
      throw ConfigurationError("unsupported schema version " + j.at("schema").dump());
    const int dim = j.at("dim").get<int>();
    const std::string arith = j.value("arithmetic", "exact");
    const std::string name = j.value("name", "user");
    if (arith != "exact" && arith != "double") throw ConfigurationError("arithmetic must be exact or double");
    if (dim == 1) {
      if (arith == "exact") return build<Rational, 1>(j, 1, name);
      return build<double, 1>(j, 1, name);
    }
    if (dim == 2) {
      if (arith == "exact") return build<QSqrt3, 2>(j, 2, name);
      return build<double, 2>(j, 2, name);
    }
    throw ConfigurationError("dim must be 1 or 2");
  } catch (const Json::exception& e) {
    throw ConfigurationError(std::string("malformed IFS JSON: ") + e.what());
  } catch (const NotProperContractionError& e) {
    throw ConfigurationError(std::string("map is not a proper contraction: ") + e.what());
  } catch (const ShapeError& e) {
    throw ConfigurationError(e.what());
  }
}

AnySystem load_ifs(const fs::path& path) {
  Json j;
  try {
    j = Json::parse(read_file(path));
  } catch (const Json::parse_error& e) {
    throw ConfigurationError(path.string() + ": " + e.what());
  }
  return ifs_from_json(j);
}

template <int D>
std::string scatter_svg(const std::vector<VecD<D>>& pts, const Box<D>& box, const std::string& title) {
  constexpr double size = 512.0, margin = 16.0;
  const double w = box.hi(0) - box.lo(0);
  const double h = box.dim() > 1 ? box.hi(1) - box.lo(1) : 0.0;
  const double scale = (size - 2 * margin) / std::max(w, h);
  std::string s;
  s += "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 512 512\" width=\"512\" height=\"512\">\n";
  s += "<!-- kmsf 1.0 -->\n";
  s += "<title>" + title + "</title>\n<rect width=\"512\" height=\"512\" fill=\"white\"/>\n";
  s += "<g fill=\"black\">\n";
  char buf[96];
  for (const auto& p : pts) {
    const double x = margin + (p(0) - box.lo(0)) * scale;
    const double y = box.dim() > 1 ? size - margin - (p(1) - box.lo(1)) * scale : size / 2.0;
    std::snprintf(buf, sizeof buf, "<circle cx=\"%.3f\" cy=\"%.3f\" r=\"0.8\"/>\n", x, y);
    s += buf;
  }
  s += "</g>\n</svg>\n";
  return s;
}

template std::string scatter_svg<1>(const std::vector<VecD<1>>&, const Box<1>&, const std::string&);
template std::string scatter_svg<2>(const std::vector<VecD<2>>&, const Box<2>&, const std::string&);

}  // namespace kmsf

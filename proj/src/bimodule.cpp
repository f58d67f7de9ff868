#include "kmsf/bimodule.hpp"

#include <algorithm>
#include <sstream>

namespace kmsf {

std::string export_element_csv(const BimoduleElement<1, double>& f, const std::vector<double>& grid) {
  std::ostringstream os;
  os << "y";
  for (std::size_t j = 0; j < f.size(); ++j) os << ",f_" << j + 1;
  os << "\n";
  for (double y : grid) {
    VecD<1> p;
    p << y;
    os << format_double(y);
    for (std::size_t j = 0; j < f.size(); ++j) os << "," << format_double(f.component(j, p));
    os << "\n";
  }
  return os.str();
}

BimoduleElement<1, double> import_element_csv(std::shared_ptr<const BimoduleContext<1>> ctx,
                                              const std::string& csv) {
  std::istringstream in(csv);
  std::string line;
  if (!std::getline(in, line)) throw ConfigurationError("empty element CSV");
  const auto cols = static_cast<std::size_t>(std::count(line.begin(), line.end(), ',')) + 1;
  if (cols != ctx->n() + 1)
    throw ShapeError("CSV has " + std::to_string(cols - 1) + " component columns, system has " +
                     std::to_string(ctx->n()) + " maps");
  auto ys = std::make_shared<std::vector<double>>();
  auto vals = std::make_shared<std::vector<std::vector<double>>>(ctx->n());
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string cell;
    std::vector<double> v;
    while (std::getline(row, cell, ',')) {
      try {
        v.push_back(std::stod(cell));
      } catch (const std::exception&) {
        throw ConfigurationError("bad CSV cell '" + cell + "'");
      }
    }
    if (v.size() != cols) throw ShapeError("ragged CSV row");
    if (!ys->empty() && v[0] <= ys->back()) throw ConfigurationError("CSV grid must increase");
    ys->push_back(v[0]);
    for (std::size_t j = 0; j < ctx->n(); ++j) (*vals)[j].push_back(v[j + 1]);
  }
  if (ys->size() < 2) throw ConfigurationError("CSV needs at least two rows");
  std::vector<BimoduleElement<1, double>::Fn> comps;
  for (std::size_t j = 0; j < ctx->n(); ++j) {
    comps.push_back([ys, vals, j](const VecD<1>& p) {
      const auto& xs = *ys;
      const auto& fs = (*vals)[j];
      const double y = std::clamp(p(0), xs.front(), xs.back());
      auto it = std::upper_bound(xs.begin(), xs.end(), y);
      if (it == xs.end()) return fs.back();
      const std::size_t hi = static_cast<std::size_t>(it - xs.begin());
      const std::size_t lo = hi - 1;
      if (y == xs[lo]) return fs[lo];
      const double t = (y - xs[lo]) / (xs[hi] - xs[lo]);
      return fs[lo] + t * (fs[hi] - fs[lo]);
    });
  }
  return BimoduleElement<1, double>(std::move(ctx), std::move(comps));
}

}  // namespace kmsf

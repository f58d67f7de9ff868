#include "kmsf/cli.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <random>
#include <set>

#include "kmsf/basis.hpp"
#include "kmsf/bimodule.hpp"
#include "kmsf/io.hpp"
#include "kmsf/kms.hpp"
#include "kmsf/presets.hpp"

namespace kmsf {

namespace fs = std::filesystem;

std::string error_json(const std::string& kind, const std::string& message) {
  Json j;
  j["schema"] = kSchemaVersion;
  j["error"] = {{"kind", kind}, {"message", message}};
  return j.dump() + "\n";
}

double parse_beta(const std::string& raw) {
  std::string s = raw;
  s.erase(std::remove_if(s.begin(), s.end(), [](unsigned char c) { return std::isspace(c); }), s.end());
  auto number = [&](const std::string& t) {
    std::size_t pos = 0;
    double v = 0.0;
    try {
      v = std::stod(t, &pos);
    } catch (const std::exception&) {
      throw ConfigurationError("cannot parse beta \"" + raw + "\"");
    }
    if (pos != t.size() || !std::isfinite(v)) throw ConfigurationError("cannot parse beta \"" + raw + "\"");
    return v;
  };
  if (s.rfind("ln", 0) == 0) {
    std::string arg = s.substr(2);
    if (arg.size() >= 2 && arg.front() == '(' && arg.back() == ')') arg = arg.substr(1, arg.size() - 2);
    const double x = number(arg);
    if (!(x > 0.0)) throw ConfigurationError("ln argument must be positive");
    return std::log(x);
  }
  return number(s);
}

namespace {

struct Outputs {
  fs::path dir;
  std::set<std::string> formats;
  bool want(const std::string& f) const { return formats.count(f) > 0; }
  void write(const std::string& name, const std::string& content) const { write_file_atomic(dir / name, content); }
};

template <class S, int D>
struct System {
  IfsSystem<S, D> ifs;
  BranchReport<S, D> report;
  Vec<S, D> seed;
  bool preset = false;
};

template <class S, int D>
Json point_json(const Vec<S, D>& p) {
  Json a = Json::array();
  for (Eigen::Index i = 0; i < p.size(); ++i) a.push_back(exact_or_number(p(i)));
  return a;
}

template <class S, int D>
Json report_json(const BranchReport<S, D>& r) {
  Json j;
  j["finite_branch"] = r.finite_branch;
  j["heuristic"] = r.heuristic;
  Json C = Json::array(), B = Json::array(), pairs = Json::array();
  for (const auto& y : r.branch_values) C.push_back(point_json(y));
  for (const auto& x : r.branch_points) B.push_back(point_json(x));
  for (const auto& p : r.pairs) {
    Json maps = Json::array();
    for (int m : p.maps) maps.push_back(m + 1);
    pairs.push_back({{"y", point_json(p.y)}, {"x", point_json(p.x)}, {"maps", maps}, {"e", p.maps.size()}});
  }
  j["C"] = C;
  j["B"] = B;
  j["pairs"] = pairs;
  return j;
}

template <class S, int D>
Json system_json(const System<S, D>& sys) {
  Json j;
  j["name"] = sys.ifs.name();
  j["source"] = sys.preset ? "preset" : "file";
  j["arithmetic"] = scalar_traits<S>::name();
  j["dim"] = sys.ifs.dim();
  j["maps"] = sys.ifs.size();
  j["c2_max"] = sys.ifs.c2_max();
  return j;
}

// ---------------------------------------------------------------- attractor

template <class S, int D>
int run_attractor(const System<S, D>& sys, const RunConfig& cfg, const Outputs& o, std::ostream& out) {
  if (!cfg.depth) throw ConfigurationError("attractor needs --depth");
  if (*cfg.depth < 1) throw ConfigurationError("--depth must be >= 1");
  const auto depth = static_cast<std::size_t>(*cfg.depth);
  const auto cloud = attractor_approx(sys.ifs, depth, sys.seed);
  const auto pts = cloud.as_double();
  const double eps = cfg.tol.value_or(1e-12 * sys.ifs.box().diameter());
  const auto verdict = check_self_similar(sys.ifs, pts, cloud.resolution, eps);

  Json rep;
  rep["schema"] = kSchemaVersion;
  rep["command"] = "attractor";
  rep["system"] = system_json(sys);
  rep["depth"] = depth;
  rep["seed_point"] = point_json(sys.seed);
  rep["points"] = pts.size();
  rep["resolution"] = cloud.resolution;
  rep["self_similar"] = {{"hausdorff_defect", verdict.defect},
                         {"eps", verdict.eps},
                         {"escaped", verdict.escaped},
                         {"pass", verdict.pass}};
  rep["pass"] = verdict.pass;
  if (o.want("csv")) {
    std::vector<std::string> words;
    words.reserve(pts.size());
    for (std::size_t i = 0; i < pts.size(); ++i) words.push_back(cloud.word(i).to_string());
    o.write("points.csv", points_csv<D>(pts, words));
  }
  if (o.want("svg")) o.write("attractor.svg", scatter_svg<D>(pts, sys.ifs.box(), sys.ifs.name() + " depth " + std::to_string(depth)));
  if (o.want("json")) o.write("report.json", dump_json(rep));
  out << "attractor " << sys.ifs.name() << ": " << pts.size() << " points, self-similar "
      << (verdict.pass ? "PASS" : "FAIL") << " (defect " << format_double(verdict.defect) << ")\n";
  return verdict.pass ? kExitOk : kExitCheckFailed;
}

// ---------------------------------------------------------------- kms

Json condition_json(const ConditionReport& r) {
  Json j;
  j["pass"] = r.pass;
  j["members"] = r.members.size();
  j["worst"] = r.worst;
  j["worst_member"] = r.worst_member;
  double min_bound = r.members.empty() ? 0.0 : r.members.front().bound;
  for (const auto& m : r.members) min_bound = std::min(min_bound, m.bound);
  j["min_bound"] = min_bound;
  if (r.literal_discrepancy) j["literal_coefficient_discrepancy"] = *r.literal_discrepancy;
  return j;
}

void residual_rows(std::string& csv, const std::string& cand, const ConditionReport& r) {
  for (const auto& m : r.members)
    csv += cand + "," + r.condition + "," + m.name + "," + format_double(m.value) + "," + format_double(m.bound) +
           "," + (m.pass ? "PASS" : "FAIL") + "\n";
}

template <class S, int D>
int run_kms(const System<S, D>& sys, const RunConfig& cfg, const Outputs& o, std::ostream& out) {
  if (!cfg.beta) throw ConfigurationError("kms needs --beta");
  const double beta = parse_beta(*cfg.beta);
  if (!(beta > 0.0)) throw ConfigurationError("--beta must be positive");
  using W = weight_t<S>;
  ClassifyParams params;
  if (cfg.tol) params.target_defect = *cfg.tol;
  if (cfg.steps) {
    if (*cfg.steps < 1) throw ConfigurationError("--steps must be >= 1");
    params.hutchinson_budget = 1;
    for (long s = 0; s < *cfg.steps; ++s) params.hutchinson_budget *= sys.ifs.size();
  }
  if (cfg.depth) {
    if (*cfg.depth < 0) throw ConfigurationError("--depth must be >= 0");
    std::size_t atoms = 0, level = 1;
    for (long d = 0; d <= *cfg.depth; ++d, level *= sys.ifs.size()) atoms += level;
    params.vertex_budget = atoms;
    params.target_defect = 0.0;
  }
  if (params.target_defect <= 0.0) params.target_defect = 1e-300;
  const auto cl = classify(sys.ifs, sys.report, beta, params);

  Json rep;
  rep["schema"] = kSchemaVersion;
  rep["command"] = "kms";
  rep["system"] = system_json(sys);
  rep["branch"] = report_json(sys.report);
  rep["beta"] = beta;
  rep["lambda"] = weight_to_double(cl.lambda.value);
  rep["lambda_exact"] = rational_to_string(cl.lambda.value);
  rep["lambda_snapped"] = cl.lambda.snapped;
  rep["regime"] = regime_name(cl.regime);
  rep["reason"] = cl.reason;
  rep["classification"] = cl.verified_class ? "proved" : "UNVERIFIED";
  const auto mb = min_beta(sys.ifs);
  rep["min_beta"] = {{"value", mb.beta}, {"interpretation", mb.interpretation}};

  Json simplex = Json::array();
  std::string residuals = "candidate,condition,member,value,bound,pass\n";
  bool pass = cl.all_pass();
  if (cl.hutchinson) {
    const auto& h = *cl.hutchinson;
    Json v{{"vertex", "hutchinson"}, {"kind", "hutchinson"}, {"steps", cl.hutchinson_steps}, {"measure", measure_json(h.measure)}};
    if (o.want("csv")) {
      v["measure_file"] = "vertex_hutchinson.csv";
      o.write("vertex_hutchinson.csv", measure_csv(h.measure));
    }
    simplex.push_back(v);
  }
  for (std::size_t i = 0; i < cl.vertices.size(); ++i) {
    const auto& c = cl.vertices[i];
    Json v{{"vertex", c.label},
           {"kind", kind_name(c.kind)},
           {"root", point_json(*c.root)},
           {"depth", c.depth},
           {"point_mass_at_root", exact_or_number(point_mass(c.measure, *c.root))},
           {"measure", measure_json(c.measure)}};
    if (o.want("csv")) {
      v["measure_file"] = "vertex_" + c.label + ".csv";
      o.write("vertex_" + c.label + ".csv", measure_csv(c.measure));
    }
    simplex.push_back(v);
  }
  rep["simplex"] = simplex;

  Json checks = Json::object();
  for (const auto& v : cl.verdicts) {
    Json c{{"pass", v.pass}, {"condition3", condition_json(v.condition3)}, {"condition4", condition_json(v.condition4)}};
    if (v.identity) c["orbit_identity"] = condition_json(*v.identity);
    checks[v.label] = c;
    residual_rows(residuals, v.label, v.condition3);
    residual_rows(residuals, v.label, v.condition4);
    if (v.identity) residual_rows(residuals, v.label, *v.identity);
  }
  rep["checks"] = checks;

  if (!cl.vertices.empty()) {
    // construct a mixture, then recover its weights
    const std::size_t m = cl.vertices.size();
    std::vector<W> w(m, W(1) / W(static_cast<long>(m)));
    if (cfg.seed) {
      std::mt19937_64 rng(*cfg.seed);
      std::vector<long> raw(m);
      long sum = 0;
      for (auto& r : raw) sum += (r = static_cast<long>(rng() % 1024) + 1);
      for (std::size_t i = 0; i < m; ++i) w[i] = W(raw[i]) / W(sum);
    }
    std::vector<const KmsCandidate<S, D>*> parts;
    for (const auto& v : cl.vertices) parts.push_back(&v);
    const auto mix = mixture(parts, w);
    const auto dec = decompose(sys.ifs, sys.report, mix.measure, cl.vertices.front().lambda, cl.vertices.front().depth);
    double err = 0.0;
    Json recovered = Json::array(), built = Json::array();
    for (std::size_t i = 0; i < m; ++i) {
      err = std::max(err, std::abs(weight_to_double(dec.weights[i]) - weight_to_double(w[i])));
      recovered.push_back(exact_or_number(dec.weights[i]));
      built.push_back(exact_or_number(w[i]));
    }
    const bool ok = dec.pass && err <= 1e-9;
    rep["decomposition"] = {{"weights", built},
                            {"recovered", recovered},
                            {"max_weight_error", err},
                            {"residual_tv", weight_to_double(dec.residual_tv)},
                            {"defect_budget", weight_to_double(dec.defect_budget)},
                            {"pass", ok}};
    pass = pass && ok;
  }
  rep["pass"] = pass;
  if (o.want("csv")) o.write("residuals.csv", residuals);
  if (o.want("json")) o.write("simplex.json", dump_json(rep));
  out << "kms " << sys.ifs.name() << " beta " << format_double(beta) << ": " << regime_name(cl.regime) << ", "
      << simplex.size() << " vertex(es), checks " << (pass ? "PASS" : "FAIL") << "\n";
  if (cl.regime == Regime::empty) out << "  " << cl.reason << "\n";
  return pass ? kExitOk : kExitCheckFailed;
}

// ---------------------------------------------------------------- basis

template <class S, int D>
int run_basis(const System<S, D>& sys, const RunConfig& cfg, const Outputs& o, std::ostream& out) {
  if (!cfg.terms) throw ConfigurationError("basis needs --terms");
  if (*cfg.terms < 1) throw ConfigurationError("--terms must be >= 1");
  const auto M = static_cast<std::size_t>(*cfg.terms);
  const double tol = cfg.tol.value_or(1e-2);
  const auto ctx = make_context(sys.ifs, sys.report);
  const PatchedBasis<D> basis(ctx);
  const auto grid = standard_grid(sys.ifs.box(), *ctx, D == 1 ? 513 : 41);
  const auto elements = standard_elements(ctx);

  std::size_t levels = 0;
  while (basis.terms_in_levels(levels + 1) <= M && levels < M) ++levels;
  const std::size_t boundary = levels ? basis.terms_in_levels(levels) : 0;

  std::string csv = "element,order,terms,sup_error\n";
  Json els = Json::array();
  double max_err = 0.0, delta = 0.0;
  bool monotone = true;
  for (const auto& [name, f] : elements) {
    const auto fw = verify_reconstruction(basis, f, M, grid, EnumerationOrder::forward);
    const auto rv = verify_reconstruction(basis, f, M, grid, EnumerationOrder::reversed_within_level);
    const double d = boundary ? std::abs(fw.profile[boundary - 1] - rv.profile[boundary - 1]) : 0.0;
    for (std::size_t t = 0; t < fw.profile.size(); ++t) {
      csv += name + ",forward," + std::to_string(t + 1) + "," + format_double(fw.profile[t]) + "\n";
      csv += name + ",reversed," + std::to_string(t + 1) + "," + format_double(rv.profile[t]) + "\n";
    }
    els.push_back({{"name", name},
                   {"sup_error", fw.sup_error},
                   {"sup_error_reversed", rv.sup_error},
                   {"order_delta", d},
                   {"saturation_index", fw.saturation_index},
                   {"monotone_after_saturation", fw.monotone_after_saturation}});
    max_err = std::max(max_err, fw.sup_error);
    delta = std::max(delta, d);
    monotone = monotone && fw.monotone_after_saturation;
  }

  const auto family = default_family(sys.ifs, sys.report);
  double branch_res = 0.0, sat_res = 0.0, max_res = 0.0;
  std::size_t sat_pts = 0, branch_pts = 0;
  const std::size_t K = std::max<std::size_t>(levels, 1);
  for (const auto& t : family.members) {
    const auto r = verify_sum_identity(basis, AlgebraElement<D>(t.fn), K, grid);
    branch_res = std::max(branch_res, r.branch_residual);
    sat_res = std::max(sat_res, r.saturated_residual);
    max_res = std::max(max_res, r.max_residual);
    sat_pts = r.saturated_points;
    branch_pts = r.branch_points_on_grid;
  }
  const bool pass = max_err < tol && delta < 1e-9 && monotone && branch_res <= 1e-12 && sat_res <= 1e-9;

  Json rep;
  rep["schema"] = kSchemaVersion;
  rep["command"] = "basis";
  rep["system"] = system_json(sys);
  rep["basis"] = basis.describe();
  rep["terms"] = M;
  rep["complete_levels"] = levels;
  rep["boundary_terms"] = boundary;
  rep["grid_points"] = grid.size();
  rep["elements"] = els;
  rep["max_sup_error"] = max_err;
  rep["tolerance"] = tol;
  rep["order_independence_delta"] = delta;
  rep["sum_identity"] = {{"K_trunc", K},
                         {"members", family.members.size()},
                         {"branch_points_on_grid", branch_pts},
                         {"branch_residual", branch_res},
                         {"saturated_points", sat_pts},
                         {"saturated_residual", sat_res},
                         {"max_residual_including_unsaturated", max_res}};
  rep["pass"] = pass;
  if (o.want("csv")) o.write("error_profile.csv", csv);
  if (o.want("json")) o.write("report.json", dump_json(rep));
  out << "basis " << sys.ifs.name() << ": " << M << " terms, max sup error " << format_double(max_err)
      << ", order delta " << format_double(delta) << ", sum identity at C " << format_double(branch_res) << " -> "
      << (pass ? "PASS" : "FAIL") << "\n";
  return pass ? kExitOk : kExitCheckFailed;
}

// ---------------------------------------------------------------- dispatch

template <class S, int D>
int dispatch(const System<S, D>& sys, const RunConfig& cfg, const Outputs& o, std::ostream& out) {
  if (cfg.command == "attractor") return run_attractor(sys, cfg, o, out);
  if (cfg.command == "kms") return run_kms(sys, cfg, o, out);
  return run_basis(sys, cfg, o, out);
}

template <class S, int D>
System<S, D> from_file_system(IfsSystem<S, D> ifs) {
  std::size_t depth = 0, atoms = 1;
  while (atoms * ifs.size() <= (std::size_t{1} << 16)) {
    atoms *= ifs.size();
    ++depth;
  }
  ifs = with_attractor_sample(ifs, std::max<std::size_t>(depth, 1));
  auto rep = branch_values(ifs);
  Vec<S, D> seed = from_double<S, D>(ifs.box().center());
  return {std::move(ifs), std::move(rep), std::move(seed), false};
}

}  // namespace

int run_command(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  try {
    if (cfg.command != "attractor" && cfg.command != "kms" && cfg.command != "basis")
      throw ConfigurationError("unknown command \"" + cfg.command + "\"");
    if (cfg.preset.has_value() == cfg.system_file.has_value())
      throw ConfigurationError("give exactly one of --preset and --system");
    if (cfg.steps && cfg.command == "attractor")
      throw ConfigurationError("attractor enumerates words to --depth; --steps is not used");
    Outputs o;
    o.dir = cfg.out;
    for (const auto& f : cfg.formats) {
      if (f != "json" && f != "csv" && f != "svg") throw ConfigurationError("unknown format \"" + f + "\"");
      o.formats.insert(f);
    }
    if (cfg.preset) {
      const std::string& p = *cfg.preset;
      if (!is_preset_name(p)) throw ConfigurationError("unknown preset \"" + p + "\" (tent, doubling, sierpinski)");
      if (p == "sierpinski" || p == "gasket") {
        auto pr = sierpinski();
        return dispatch(System<QSqrt3, 2>{pr.ifs, pr.expected, pr.natural_seed, true}, cfg, o, out);
      }
      auto pr = p == "tent" ? tent() : doubling();
      return dispatch(System<Rational, 1>{pr.ifs, pr.expected, pr.natural_seed, true}, cfg, o, out);
    }
    auto any = load_ifs(*cfg.system_file);
    return std::visit([&](auto& ifs) { return dispatch(from_file_system(std::move(ifs)), cfg, o, out); }, any);
  } catch (const ConfigurationError& e) {
    out << error_json("configuration", e.what());
    return kExitConfig;
  } catch (const DomainError& e) {
    out << error_json("domain", e.what());
    return kExitConfig;
  } catch (const Error& e) {
    err << error_json("runtime", e.what());
    return kExitCheckFailed;
  } catch (const std::exception& e) {
    err << error_json("internal", e.what());
    return kExitCheckFailed;
  }
}

}  // namespace kmsf

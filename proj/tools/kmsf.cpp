// kmsf: attractor | kms | basis
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "kmsf/cli.hpp"

int main(int argc, char** argv) {
  CLI::App app{"IFS bimodules, orbit measures and KMS simplices"};
  app.require_subcommand(1, 1);
  kmsf::RunConfig cfg;
  std::string formats;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--preset", cfg.preset, "tent | doubling | sierpinski");
    sub->add_option("--system", cfg.system_file, "IFS description (JSON)");
    sub->add_option("--tol", cfg.tol, "tolerance");
    sub->add_option("--seed", cfg.seed, "seed for random choices");
    sub->add_option("--out", cfg.out, "output directory")->capture_default_str();
    sub->add_option("--format", formats, "comma separated subset of json,csv,svg");
  };
  auto* att = app.add_subcommand("attractor", "word-enumerated attractor and self-similarity check");
  add_common(att);
  att->add_option("--depth", cfg.depth, "word length");
  auto* kms = app.add_subcommand("kms", "classify and verify the KMS simplex at beta");
  add_common(kms);
  kms->add_option("--beta", cfg.beta, "inverse temperature, e.g. 1.5 or ln4");
  kms->add_option("--depth", cfg.depth, "orbit truncation depth");
  kms->add_option("--steps", cfg.steps, "Hutchinson iterations");
  auto* basis = app.add_subcommand("basis", "patched basis reconstruction and sum identity");
  add_common(basis);
  basis->add_option("--terms", cfg.terms, "number of basis terms");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cout << kmsf::error_json("configuration", e.what());
    return kmsf::kExitConfig;
  }

  cfg.command = app.get_subcommands().front()->get_name();
  if (!formats.empty()) {
    cfg.formats.clear();
    std::stringstream ss(formats);
    for (std::string f; std::getline(ss, f, ',');)
      if (!f.empty()) cfg.formats.push_back(f);
  }
  return kmsf::run_command(cfg, std::cout, std::cerr);
}

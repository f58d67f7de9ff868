#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace kmsf {

struct RunConfig {
  std::string command;  // attractor | kms | basis
  std::optional<std::string> preset;
  std::optional<std::string> system_file;
  std::optional<std::string> beta;  // number, or "lnX" / "ln(X)"
  std::optional<long> depth;
  std::optional<long> steps;
  std::optional<long> terms;
  std::optional<std::uint64_t> seed;
  std::optional<double> tol;
  std::string out = "kmsf_out";
  std::vector<std::string> formats{"json", "csv", "svg"};
};

enum ExitCode : int { kExitOk = 0, kExitCheckFailed = 1, kExitConfig = 2 };

// beta from "1.386", "ln4", "ln(4)"
double parse_beta(const std::string& s);

// Runs one command; writes artifacts under cfg.out, a summary to `out`, and a
// JSON error object to `out` on configuration errors.
int run_command(const RunConfig& cfg, std::ostream& out, std::ostream& err);

// {"schema": 1, "error": {"kind": ..., "message": ...}}
std::string error_json(const std::string& kind, const std::string& message);

}  // namespace kmsf

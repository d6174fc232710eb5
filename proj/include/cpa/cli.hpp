#ifndef CPA_CLI_HPP
#define CPA_CLI_HPP

#include <cstdint>
#include <iosfwd>
#include <string>

#include "cpa/io.hpp"

namespace cpa {

enum ExitCode : int {
  kExitOk = 0,
  kExitValidation = 1,
  kExitVerification = 2,
  kExitResource = 3,
};

struct RunConfig {
  std::string subcommand;
  std::string input;          // path, or "paper-example"
  int lmax = -1;              // -1: per-command default
  double tol = 1e-12;
  Format format = Format::text;
  std::uint64_t seed = 1;
  bool parallel = false;
  int n = 3;                  // exact: random instance size when no input
  int d = 2;
  std::string suite;          // verify
  int instances = 200;        // verify
  int resolution = 100000;    // pointprocess
};

Table cmd_bounds(const RunConfig& cfg);
Table cmd_exact(const RunConfig& cfg);
Table cmd_pointprocess(const RunConfig& cfg);

/// Full command line, e.g. {"cpa", "bounds", "--input", "paper-example"}.
/// Returns the process exit code; never throws.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace cpa

#endif  // CPA_CLI_HPP

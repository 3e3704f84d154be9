#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <limits>
#include <optional>
#include <string>

namespace mkv {

/// Exit codes of the command-line tool.
enum ExitCode : int { kExitOk = 0, kExitInput = 1, kExitNumerical = 2, kExitCondition = 3 };

struct RunOptions {
  std::filesystem::path config;
  std::filesystem::path out_dir;  // overrides [output] dir
  bool strict = false;
  bool force = false;
  std::optional<std::uint64_t> seed;

  // besov
  std::filesystem::path field;
  double gamma = 0.0;
  double ell = 2.0;
  double m = std::numeric_limits<double>::infinity();

  // compare
  std::filesystem::path lhs;
  std::filesystem::path rhs;
};

/// Runs one of check, fp-solve, particles, besov, kernels, compare and returns
/// the exit code. Reports go to `out`, diagnostics to `err`.
int run(const std::string& subcommand, const RunOptions& options, std::ostream& out, std::ostream& err);

}  // namespace mkv

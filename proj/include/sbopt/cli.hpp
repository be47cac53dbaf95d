#ifndef SBOPT_CLI_HPP
#define SBOPT_CLI_HPP

#include "sbopt/bench.hpp"

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace sbopt {

/// Command-line values that override a config file. Unset fields keep the file value.
struct ConfigOverrides {
  std::optional<std::string> suite;
  std::optional<std::vector<std::string>> algorithms;
  std::optional<std::vector<std::string>> problems;
  std::optional<std::vector<int>> dims;
  std::optional<int> budget; // applied to every dimension in the run
  std::optional<int> warmup; // same
  std::optional<int> repetitions;
  std::optional<std::uint64_t> seed;
  std::optional<double> violation_threshold;
  std::optional<int> jobs;
};

/// Reads the optional JSONC file, applies the overrides and validates the
/// result. Listing problems without a suite sets the suite to "custom".
BenchmarkConfig parse_config(const std::optional<std::filesystem::path>& file, const ConfigOverrides& overrides = {});

inline constexpr const char* kResultsEnv = "SBOPT_RESULTS_DIR";

/// $SBOPT_RESULTS_DIR, or "results".
std::filesystem::path default_output_root();

/// Entry point of the sbopt tool; args exclude the program name. Returns the exit code.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace sbopt

#endif // SBOPT_CLI_HPP

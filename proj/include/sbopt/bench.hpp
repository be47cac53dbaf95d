#ifndef SBOPT_BENCH_HPP
#define SBOPT_BENCH_HPP

#include "sbopt/core.hpp"

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace sbopt {

struct BudgetRule {
  int evaluations = 0;
  int warmup = 0;
};

/// Protocol budget for dims 2, 5, 7, 10 and 150/64 for the 32-parameter CSTR.
/// Other dimensions raise ConfigError.
BudgetRule default_budget(int dim);

struct BenchmarkConfig {
  // Directory label; "custom" when problems are listed explicitly.
  std::string suite = "unconstrained";
  std::vector<std::string> algorithms; // empty: all
  std::vector<std::string> problems;   // empty: the suite's problems
  std::vector<int> dims{2, 5, 7};
  int repetitions = 5;
  std::map<int, int> budgets; // dim -> n_e; missing dims use default_budget
  std::map<int, int> warmup;  // dim -> n_c
  std::uint64_t seed = 0;
  double violation_threshold = 1e-3;
  int jobs = 0; // 0: hardware concurrency
};

struct ProblemPlan {
  std::string key;
  int dim = 0;
  int n_constraints = 0;
  BudgetRule budget;
  std::vector<std::string> algorithms;
};

struct Cell {
  std::string algorithm;
  std::string problem;
  int dim = 0;
  int repetition = 1; // 1-based
  std::uint64_t seed = 0;
};

/// Resolves problems, algorithms and budgets and validates them. Constrained
/// problems keep only the constraint-handling algorithms.
std::vector<ProblemPlan> plan_benchmark(const BenchmarkConfig& config);
/// Copy of the config with algorithms, problems, budgets and warm-up filled in.
BenchmarkConfig resolve_config(const BenchmarkConfig& config);
/// One cell per (problem, algorithm, repetition), in that nesting order.
std::vector<Cell> benchmark_cells(const BenchmarkConfig& config, const std::vector<ProblemPlan>& plan);
std::uint64_t cell_seed(std::uint64_t base, std::string_view algorithm, std::string_view problem, int dim,
                        int repetition);

// ---------------------------------------------------------------------------
// Scoring
// ---------------------------------------------------------------------------

/// (worst - mean) / (worst - best); 1 when worst == best.
double score_r(double worst, double best, double mean);
/// Arithmetic mean. Throws ConfigError on empty input.
double score_p(std::span<const double> r);

struct ViolationStats {
  double feasible_fraction = 1.0;
  double mean_violation = 0.0; // over violating evaluations only
  int evaluations = 0;
  int violations = 0;
};

/// Violation iff max_i g_i > threshold. Unconstrained evaluations count as feasible.
ViolationStats count_violations(std::span<const double> max_constraint, double threshold = 1e-3);
ViolationStats count_violations(const Trajectory& trajectory, double threshold = 1e-3);
ViolationStats count_violations(std::span<const Trajectory> trajectories, double threshold = 1e-3);

/// Running minimum of y. With constraints only feasible evaluations count and
/// entries before the first feasible one hold the trajectory's largest y.
std::vector<double> aligned_best_so_far(const Trajectory& trajectory, bool constrained, double threshold = 1e-3);

/// Linear interpolation between order statistics, q in [0, 1].
double percentile(std::vector<double> values, double q);

struct ConvergencePoint {
  int iteration = 0;
  double mean = 0.0;
  double p10 = 0.0;
  double p90 = 0.0;
};

std::vector<ConvergencePoint> convergence_statistics(const std::vector<std::vector<double>>& curves);

struct AlgorithmScore {
  std::string algorithm;
  double p = 0.0;
  std::vector<double> r;         // k = n_c + 1 .. n_e
  std::vector<double> mean_best; // same range
  ViolationStats violations;
  int completed = 0;
  int failed = 0;
  std::vector<ConvergencePoint> convergence; // k = 1 .. n_e
};

struct ProblemScore {
  std::string problem;
  int dim = 0;
  int n_constraints = 0;
  BudgetRule budget;
  std::vector<AlgorithmScore> algorithms; // only algorithms with a completed run
  std::vector<std::string> missing;       // algorithms without any completed run
};

struct ScoreTable {
  double threshold = 1e-3;
  std::vector<ProblemScore> problems;
  std::map<std::string, double> overall; // mean p over the problems an algorithm was scored on
};

struct AlgorithmRuns {
  std::string algorithm;
  std::vector<Trajectory> runs; // incomplete runs are counted as failed and ignored
};

ProblemScore score_problem(const ProblemPlan& plan, const std::vector<AlgorithmRuns>& runs, double threshold);
ScoreTable score_table(std::vector<ProblemScore> problems, double threshold);

// ---------------------------------------------------------------------------
// Persistence
// ---------------------------------------------------------------------------

/// Columns iteration, x1..xn, y, g1..gm, best_so_far; floats with 17 significant digits.
std::string trajectory_csv(const Trajectory& trajectory, int dim, int n_constraints, double threshold = 1e-3);
void write_trajectory_csv(const std::filesystem::path& path, const Trajectory& trajectory, int dim,
                          int n_constraints, double threshold = 1e-3);
Trajectory read_trajectory_csv(const std::filesystem::path& path);

std::string scores_json(const ScoreTable& table);
/// problem, algorithm, iteration, mean, p10, p90.
std::string convergence_csv(const ScoreTable& table);
/// Rows "algorithm | p_a | feasible% | mean violation" per problem.
std::string feasibility_report(const ScoreTable& table);

std::string config_to_json(const BenchmarkConfig& config);
/// JSON with comments; unknown keys raise ConfigError.
BenchmarkConfig config_from_json(std::string_view text);

struct CellStatus {
  Cell cell;
  bool ok = false;
  int evaluations = 0;
  std::string message;            // error text when !ok
  std::vector<std::string> notes; // optimizer fallbacks
};

struct BenchmarkResult {
  ScoreTable scores;
  std::vector<CellStatus> cells;
  bool all_ok() const;
};

/// Runs every cell, writes manifest.json first, then <problem>/<algorithm>/rep<k>.csv,
/// status.json, scores.json and convergence.csv under `directory`. An existing
/// manifest must hold the same configuration and is left untouched.
BenchmarkResult run_benchmark(const BenchmarkConfig& config, const std::filesystem::path& directory,
                              const std::function<void(const CellStatus&)>& on_cell = {});

/// Configuration stored in a results directory's manifest.
BenchmarkConfig read_manifest_config(const std::filesystem::path& directory);
/// Recomputes the scores from the trajectories in `directory`.
ScoreTable rescore(const std::filesystem::path& directory);

std::string toolkit_version();

} // namespace sbopt

#endif // SBOPT_BENCH_HPP

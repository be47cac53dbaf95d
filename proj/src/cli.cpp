#include "sbopt/cli.hpp"
#include "sbopt/optimizers.hpp"
#include "sbopt/problems.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

namespace sbopt {

namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw ConfigError("cannot read config file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<int> problem_dims(const BenchmarkConfig& config) {
  std::vector<std::string> keys = config.problems;
  if (keys.empty()) {
    if (config.suite == "custom")
      throw ConfigError("suite 'custom' needs an explicit problem list");
    keys = suite_problem_keys(config.suite, config.dims);
  }
  std::set<int> dims;
  for (const auto& k : keys)
    dims.insert(make_problem(k).dim());
  return {dims.begin(), dims.end()};
}

} // namespace

BenchmarkConfig parse_config(const std::optional<fs::path>& file, const ConfigOverrides& o) {
  BenchmarkConfig c = file ? config_from_json(slurp(*file)) : BenchmarkConfig{};
  if (o.problems && !o.suite)
    c.suite = "custom";
  if (o.suite)
    c.suite = *o.suite;
  if (o.algorithms)
    c.algorithms = *o.algorithms;
  if (o.problems)
    c.problems = *o.problems;
  if (o.dims)
    c.dims = *o.dims;
  if (o.repetitions)
    c.repetitions = *o.repetitions;
  if (o.seed)
    c.seed = *o.seed;
  if (o.violation_threshold)
    c.violation_threshold = *o.violation_threshold;
  if (o.jobs)
    c.jobs = *o.jobs;
  if (o.budget || o.warmup) {
    for (int d : problem_dims(c)) {
      if (o.budget)
        c.budgets[d] = *o.budget;
      if (o.warmup)
        c.warmup[d] = *o.warmup;
      if (!c.warmup.contains(d))
        c.warmup[d] = default_budget(d).warmup;
      if (!c.budgets.contains(d))
        c.budgets[d] = default_budget(d).evaluations;
    }
  }
  plan_benchmark(c);
  return c;
}

fs::path default_output_root() {
  if (const char* env = std::getenv(kResultsEnv); env != nullptr && *env != '\0')
    return env;
  return "results";
}

namespace {

void add_config_options(CLI::App& cmd, ConfigOverrides& o, std::string& config_file) {
  cmd.add_option("--config", config_file, "Benchmark config file (JSON with comments)");
  cmd.add_option("--suite", o.suite, "unconstrained | constrained | casestudies");
  cmd.add_option("--algos", o.algorithms, "Algorithm tags")->delimiter(',');
  cmd.add_option("--problems", o.problems, "Registry keys (overrides the suite's problem list)")->delimiter(',');
  cmd.add_option("--dims", o.dims, "Dimensions for the unconstrained suite")->delimiter(',');
  cmd.add_option("--budget", o.budget, "Evaluations per run, for every dimension");
  cmd.add_option("--warmup", o.warmup, "Leading evaluations excluded from scoring, for every dimension");
  cmd.add_option("--reps", o.repetitions, "Repetitions per algorithm and problem");
  cmd.add_option("--seed", o.seed, "Base seed");
  cmd.add_option("--threshold", o.violation_threshold, "Constraint violation threshold");
  cmd.add_option("--jobs", o.jobs, "Concurrent cells (0: all cores)");
}

void print_scores(const ScoreTable& table, std::ostream& out) {
  bool constrained = false;
  for (const auto& p : table.problems) {
    constrained = constrained || p.n_constraints > 0;
    out << p.problem << ":";
    for (const auto& a : p.algorithms) {
      char buf[64];
      std::snprintf(buf, sizeof buf, " %s=%.2f", a.algorithm.c_str(), a.p);
      out << buf;
    }
    out << "\n";
  }
  out << "overall:";
  for (const auto& [name, p] : table.overall) {
    char buf[64];
    std::snprintf(buf, sizeof buf, " %s=%.2f", name.c_str(), p);
    out << buf;
  }
  out << "\n";
  if (constrained) {
    std::vector<ProblemScore> subset;
    for (const auto& p : table.problems)
      if (p.n_constraints > 0)
        subset.push_back(p);
    ScoreTable c;
    c.problems = std::move(subset);
    out << feasibility_report(c);
  }
}

int cmd_run(const ConfigOverrides& o, const std::string& config_file, const std::string& manifest,
            const std::string& out_root, bool strict, std::ostream& out, std::ostream& err) {
  BenchmarkConfig config;
  if (!manifest.empty()) {
    fs::path dir = manifest;
    if (fs::is_regular_file(dir))
      dir = dir.parent_path();
    config = read_manifest_config(dir);
    if (o.jobs)
      config.jobs = *o.jobs;
  } else {
    config = parse_config(config_file.empty() ? std::nullopt : std::optional<fs::path>(config_file), o);
  }
  const fs::path root = out_root.empty() ? default_output_root() : fs::path(out_root);
  const fs::path dir = root / config.suite;
  const BenchmarkResult result = run_benchmark(config, dir, [&err](const CellStatus& s) {
    err << (s.ok ? "done   " : "FAILED ") << s.cell.problem << " " << s.cell.algorithm << " rep" << s.cell.repetition;
    if (!s.ok)
      err << ": " << s.message;
    err << "\n";
  });
  print_scores(result.scores, out);
  out << "results: " << dir.string() << "\n";
  const auto failed = std::count_if(result.cells.begin(), result.cells.end(), [](const auto& s) { return !s.ok; });
  if (failed > 0)
    err << failed << " cell(s) failed; see status.json\n";
  return strict && failed > 0 ? 3 : 0;
}

int cmd_optimize(const std::string& algo, const std::string& problem_key, std::optional<int> budget,
                 std::uint64_t seed, const std::string& out_file, std::ostream& out, std::ostream& err) {
  const Problem problem = make_problem(problem_key);
  const int n = budget ? *budget : default_budget(problem.dim()).evaluations;
  const Trajectory t = run_optimizer(algo, problem, n, seed);
  const std::string csv = trajectory_csv(t, problem.dim(), problem.n_constraints());
  if (out_file.empty()) {
    out << csv;
  } else {
    const fs::path path = out_file;
    if (path.has_parent_path())
      fs::create_directories(path.parent_path());
    std::ofstream f(path, std::ios::binary);
    if (!f)
      throw Error("cannot write " + path.string());
    f << csv;
  }
  const Evaluation& best = final_incumbent(t);
  err << "best y = " << best.y << " at evaluation " << best.index;
  if (problem.n_constraints() > 0)
    err << " (max g = " << best.max_constraint() << ")";
  err << "\n";
  for (const auto& note : t.notes)
    err << "note: " << note << "\n";
  return t.size() == n ? 0 : 3;
}

int cmd_score(const std::string& dir, bool check, const std::string& out_file, std::ostream& out,
              std::ostream& err) {
  const ScoreTable table = rescore(dir);
  const std::string json = scores_json(table);
  if (check) {
    const fs::path stored = fs::path(dir) / "scores.json";
    std::ifstream in(stored, std::ios::binary);
    if (!in)
      throw ConfigError("no scores.json in " + dir);
    std::ostringstream ss;
    ss << in.rdbuf();
    if (ss.str() != json) {
      err << "re-scored table differs from " << stored.string() << "\n";
      return 4;
    }
    out << "scores.json reproduced exactly\n";
    return 0;
  }
  if (out_file.empty()) {
    out << json;
  } else {
    std::ofstream f(out_file, std::ios::binary);
    if (!f)
      throw Error("cannot write " + out_file);
    f << json;
  }
  return 0;
}

void cmd_list(std::ostream& out) {
  out << "algorithms:";
  for (Algorithm a : all_algorithms())
    out << " " << to_string(a) << (handles_constraints(a) ? "*" : "");
  out << "\n  (* handles constraints)\nproblems:";
  for (const auto& k : registry_keys())
    out << " " << k;
  out << "\n  (test functions accept any dimension: <name>-d<n>)\nsuites: unconstrained constrained casestudies\n";
}

} // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Surrogate-based optimization benchmarks", "sbopt"};
  app.require_subcommand(1);

  ConfigOverrides run_o;
  std::string run_config, run_manifest, run_out;
  bool strict = false;
  auto* run = app.add_subcommand("run", "Run a benchmark suite");
  add_config_options(*run, run_o, run_config);
  run->add_option("--out", run_out, std::string("Output root (default $") + kResultsEnv + " or ./results)");
  run->add_option("--manifest", run_manifest, "Repeat the run recorded in a manifest or results directory");
  run->add_flag("--strict", strict, "Exit nonzero when any cell failed");

  std::string algo, problem_key, opt_out;
  std::optional<int> opt_budget;
  std::uint64_t opt_seed = 0;
  auto* optimize = app.add_subcommand("optimize", "Run one algorithm on one problem");
  optimize->add_option("--algo", algo, "Algorithm tag")->required();
  optimize->add_option("--problem", problem_key, "Registry key")->required();
  optimize->add_option("--budget", opt_budget, "Evaluations (default: protocol budget of the dimension)");
  optimize->add_option("--seed", opt_seed, "Seed");
  optimize->add_option("--out", opt_out, "Trajectory CSV path (default: stdout)");

  std::string score_dir, score_out;
  bool score_check = false;
  auto* score = app.add_subcommand("score", "Re-score an existing results directory");
  score->add_option("directory", score_dir, "Results directory holding manifest.json")->required();
  score->add_flag("--check", score_check, "Compare with the stored scores.json");
  score->add_option("--out", score_out, "Write the table here instead of stdout");

  auto* list = app.add_subcommand("list", "Show algorithms, problems and suites");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << e.what() << "\n";
    if (app.get_subcommands().empty())
      err << app.help();
    return 2;
  }

  try {
    if (run->parsed())
      return cmd_run(run_o, run_config, run_manifest, run_out, strict, out, err);
    if (optimize->parsed())
      return cmd_optimize(algo, problem_key, opt_budget, opt_seed, opt_out, out, err);
    if (score->parsed())
      return cmd_score(score_dir, score_check, score_out, out, err);
    if (list->parsed()) {
      cmd_list(out);
      return 0;
    }
  } catch (const ConfigError& e) {
    err << "configuration error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}

} // namespace sbopt

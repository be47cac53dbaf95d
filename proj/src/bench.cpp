#include "sbopt/bench.hpp"
#include "sbopt/optimizers.hpp"
#include "sbopt/problems.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <limits>
#include <mutex>
#include <numeric>
#include <set>
#include <sstream>
#include <thread>

#ifndef SBOPT_VERSION
#define SBOPT_VERSION "0.0.0"
#endif

namespace sbopt {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

std::string toolkit_version() { return SBOPT_VERSION; }

BudgetRule default_budget(int dim) {
  if (has_protocol_budget(dim)) {
    const ProtocolBudget b = protocol_budget(dim);
    return {b.evaluations, b.warmup};
  }
  if (dim == 32)
    return {150, 64};
  throw ConfigError("no default budget for dimension " + std::to_string(dim) + "; set budgets and warmup for it");
}

namespace {

template <class T>
bool has_duplicates(const std::vector<T>& v) {
  std::set<T> seen(v.begin(), v.end());
  return seen.size() != v.size();
}

std::vector<std::string> all_tags() {
  std::vector<std::string> tags;
  for (Algorithm a : all_algorithms())
    tags.emplace_back(to_string(a));
  return tags;
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_atomically(const fs::path& path, const std::string& content) {
  if (path.has_parent_path())
    fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out)
      throw Error("cannot write " + tmp.string());
    out << content;
    if (!out)
      throw Error("write failed for " + tmp.string());
  }
  fs::rename(tmp, path);
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw ConfigError("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path cell_file(const Cell& cell) {
  return fs::path(cell.problem) / cell.algorithm / ("rep" + std::to_string(cell.repetition) + ".csv");
}

} // namespace

BenchmarkConfig resolve_config(const BenchmarkConfig& config) {
  BenchmarkConfig out = config;
  if (out.algorithms.empty())
    out.algorithms = all_tags();
  for (const auto& a : out.algorithms)
    parse_algorithm(a);
  if (out.problems.empty()) {
    if (out.suite == "custom")
      throw ConfigError("suite 'custom' needs an explicit problem list");
    out.problems = suite_problem_keys(out.suite, out.dims);
  }
  for (const auto& key : out.problems) {
    const int dim = make_problem(key).dim();
    if (!out.budgets.contains(dim) || !out.warmup.contains(dim)) {
      const BudgetRule rule = default_budget(dim);
      out.budgets.try_emplace(dim, rule.evaluations);
      out.warmup.try_emplace(dim, rule.warmup);
    }
  }
  return out;
}

std::vector<ProblemPlan> plan_benchmark(const BenchmarkConfig& raw) {
  if (raw.repetitions < 1)
    throw ConfigError("repetitions must be >= 1");
  if (!(raw.violation_threshold >= 0.0) || !std::isfinite(raw.violation_threshold))
    throw ConfigError("violation_threshold must be finite and >= 0");
  if (raw.jobs < 0)
    throw ConfigError("jobs must be >= 0");
  for (int d : raw.dims)
    if (d < 1)
      throw ConfigError("dims must be >= 1");
  const BenchmarkConfig config = resolve_config(raw);
  if (has_duplicates(config.algorithms))
    throw ConfigError("duplicate algorithm in configuration");
  if (has_duplicates(config.problems))
    throw ConfigError("duplicate problem in configuration");

  std::vector<ProblemPlan> plan;
  for (const auto& key : config.problems) {
    const Problem problem = make_problem(key);
    ProblemPlan p;
    p.key = key;
    p.dim = problem.dim();
    p.n_constraints = problem.n_constraints();
    p.budget = {config.budgets.at(p.dim), config.warmup.at(p.dim)};
    if (p.budget.warmup < 0)
      throw ConfigError("warmup must be >= 0 for dimension " + std::to_string(p.dim));
    if (p.budget.evaluations <= p.budget.warmup)
      throw ConfigError("budget " + std::to_string(p.budget.evaluations) + " must exceed warmup " +
                        std::to_string(p.budget.warmup) + " for dimension " + std::to_string(p.dim));
    for (const auto& tag : config.algorithms) {
      const Algorithm a = parse_algorithm(tag);
      if (p.n_constraints > 0 && !handles_constraints(a))
        continue;
      const int init = initial_design_size(a, p.dim);
      if (p.budget.evaluations < init)
        throw ConfigError(tag + " on " + key + ": budget " + std::to_string(p.budget.evaluations) +
                          " is below the initial design size " + std::to_string(init));
      p.algorithms.push_back(tag);
    }
    if (p.algorithms.empty())
      throw ConfigError("no selected algorithm handles the constraints of " + key);
    plan.push_back(std::move(p));
  }
  return plan;
}

std::uint64_t cell_seed(std::uint64_t base, std::string_view algorithm, std::string_view problem, int dim,
                        int repetition) {
  std::string tag;
  tag.append(algorithm).append("|").append(problem).append("|");
  tag += std::to_string(dim) + "|" + std::to_string(repetition);
  return derive_seed(base, tag);
}

std::vector<Cell> benchmark_cells(const BenchmarkConfig& config, const std::vector<ProblemPlan>& plan) {
  std::vector<Cell> cells;
  for (const auto& p : plan)
    for (const auto& a : p.algorithms)
      for (int r = 1; r <= config.repetitions; ++r)
        cells.push_back({a, p.key, p.dim, r, cell_seed(config.seed, a, p.key, p.dim, r)});
  return cells;
}

// ---------------------------------------------------------------------------
// Scoring
// ---------------------------------------------------------------------------

double score_r(double worst, double best, double mean) {
  if (worst == best)
    return 1.0;
  return (worst - mean) / (worst - best);
}

double score_p(std::span<const double> r) {
  if (r.empty())
    throw ConfigError("score_p: no iterations to average");
  double sum = 0.0;
  for (double v : r)
    sum += v;
  return sum / static_cast<double>(r.size());
}

ViolationStats count_violations(std::span<const double> max_constraint, double threshold) {
  ViolationStats s;
  double total = 0.0;
  for (double m : max_constraint) {
    ++s.evaluations;
    if (m > threshold) {
      ++s.violations;
      total += m;
    }
  }
  if (s.evaluations > 0)
    s.feasible_fraction = static_cast<double>(s.evaluations - s.violations) / s.evaluations;
  if (s.violations > 0)
    s.mean_violation = total / s.violations;
  return s;
}

ViolationStats count_violations(const Trajectory& trajectory, double threshold) {
  return count_violations(std::span<const Trajectory>(&trajectory, 1), threshold);
}

ViolationStats count_violations(std::span<const Trajectory> trajectories, double threshold) {
  std::vector<double> m;
  for (const auto& t : trajectories)
    for (const auto& e : t.evaluations)
      m.push_back(e.max_constraint());
  return count_violations(m, threshold);
}

std::vector<double> aligned_best_so_far(const Trajectory& trajectory, bool constrained, double threshold) {
  if (trajectory.evaluations.empty())
    return {};
  if (!constrained)
    return best_so_far(trajectory);
  double worst = -std::numeric_limits<double>::infinity();
  for (const auto& e : trajectory.evaluations)
    worst = std::max(worst, e.y);
  std::vector<double> out;
  out.reserve(trajectory.evaluations.size());
  double best = std::numeric_limits<double>::infinity();
  bool found = false;
  for (const auto& e : trajectory.evaluations) {
    if (e.feasible(threshold)) {
      best = std::min(best, e.y);
      found = true;
    }
    out.push_back(found ? best : worst);
  }
  return out;
}

double percentile(std::vector<double> values, double q) {
  if (values.empty())
    throw ConfigError("percentile: empty input");
  if (!(q >= 0.0 && q <= 1.0))
    throw ConfigError("percentile: q must lie in [0, 1]");
  std::sort(values.begin(), values.end());
  const double pos = q * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return values[lo] + frac * (values[hi] - values[lo]);
}

std::vector<ConvergencePoint> convergence_statistics(const std::vector<std::vector<double>>& curves) {
  std::vector<ConvergencePoint> out;
  if (curves.empty())
    return out;
  const std::size_t n = curves.front().size();
  for (const auto& c : curves)
    if (c.size() != n)
      throw ConfigError("convergence_statistics: curves differ in length");
  for (std::size_t k = 0; k < n; ++k) {
    std::vector<double> column;
    double sum = 0.0;
    for (const auto& c : curves) {
      column.push_back(c[k]);
      sum += c[k];
    }
    out.push_back({static_cast<int>(k + 1), sum / static_cast<double>(curves.size()), percentile(column, 0.1),
                   percentile(column, 0.9)});
  }
  return out;
}

ProblemScore score_problem(const ProblemPlan& plan, const std::vector<AlgorithmRuns>& runs, double threshold) {
  ProblemScore score;
  score.problem = plan.key;
  score.dim = plan.dim;
  score.n_constraints = plan.n_constraints;
  score.budget = plan.budget;
  const int n_e = plan.budget.evaluations;
  const int n_c = plan.budget.warmup;
  const bool constrained = plan.n_constraints > 0;

  for (const auto& entry : runs) {
    AlgorithmScore a;
    a.algorithm = entry.algorithm;
    std::vector<Trajectory> complete;
    std::vector<std::vector<double>> curves;
    for (const auto& t : entry.runs) {
      if (t.size() != n_e) {
        ++a.failed;
        continue;
      }
      ++a.completed;
      curves.push_back(aligned_best_so_far(t, constrained, threshold));
      complete.push_back(t);
    }
    if (a.completed == 0) {
      score.missing.push_back(entry.algorithm);
      continue;
    }
    a.convergence = convergence_statistics(curves);
    for (int k = n_c; k < n_e; ++k) {
      double sum = 0.0;
      for (const auto& c : curves)
        sum += c[static_cast<std::size_t>(k)];
      a.mean_best.push_back(sum / static_cast<double>(curves.size()));
    }
    a.violations = count_violations(complete, threshold);
    score.algorithms.push_back(std::move(a));
  }

  const auto n = static_cast<std::size_t>(n_e - n_c);
  for (auto& a : score.algorithms)
    a.r.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    double worst = -std::numeric_limits<double>::infinity();
    double best = std::numeric_limits<double>::infinity();
    for (const auto& a : score.algorithms) {
      worst = std::max(worst, a.mean_best[k]);
      best = std::min(best, a.mean_best[k]);
    }
    for (auto& a : score.algorithms)
      a.r[k] = score_r(worst, best, a.mean_best[k]);
  }
  for (auto& a : score.algorithms)
    a.p = score_p(a.r);
  return score;
}

ScoreTable score_table(std::vector<ProblemScore> problems, double threshold) {
  ScoreTable table;
  table.threshold = threshold;
  table.problems = std::move(problems);
  std::map<std::string, std::pair<double, int>> acc;
  for (const auto& p : table.problems)
    for (const auto& a : p.algorithms) {
      auto& [sum, count] = acc[a.algorithm];
      sum += a.p;
      ++count;
    }
  for (const auto& [name, v] : acc)
    table.overall[name] = v.first / v.second;
  return table;
}

// ---------------------------------------------------------------------------
// Persistence
// ---------------------------------------------------------------------------

std::string trajectory_csv(const Trajectory& trajectory, int dim, int n_constraints, double threshold) {
  std::string out = "iteration";
  for (int i = 1; i <= dim; ++i)
    out += ",x" + std::to_string(i);
  out += ",y";
  for (int i = 1; i <= n_constraints; ++i)
    out += ",g" + std::to_string(i);
  out += ",best_so_far\n";
  const std::vector<double> best = aligned_best_so_far(trajectory, n_constraints > 0, threshold);
  for (std::size_t k = 0; k < trajectory.evaluations.size(); ++k) {
    const Evaluation& e = trajectory.evaluations[k];
    if (e.x.size() != dim || e.g.size() != n_constraints)
      throw ConfigError("trajectory_csv: evaluation shape does not match the header");
    out += std::to_string(e.index);
    for (int i = 0; i < dim; ++i)
      out += "," + format_double(e.x[i]);
    out += "," + format_double(e.y);
    for (int i = 0; i < n_constraints; ++i)
      out += "," + format_double(e.g[i]);
    out += "," + format_double(best[k]) + "\n";
  }
  return out;
}

void write_trajectory_csv(const fs::path& path, const Trajectory& trajectory, int dim, int n_constraints,
                          double threshold) {
  write_atomically(path, trajectory_csv(trajectory, dim, n_constraints, threshold));
}

namespace {

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> parts;
  std::string cur;
  std::istringstream ss(line);
  while (std::getline(ss, cur, sep))
    parts.push_back(cur);
  if (!line.empty() && line.back() == sep)
    parts.emplace_back();
  return parts;
}

double parse_double(const std::string& s, const fs::path& path) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size())
    throw ConfigError("bad number '" + s + "' in " + path.string());
  return v;
}

} // namespace

Trajectory read_trajectory_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in)
    throw ConfigError("cannot read trajectory " + path.string());
  std::string line;
  if (!std::getline(in, line))
    throw ConfigError("empty trajectory file " + path.string());
  const auto header = split(line, ',');
  int dim = 0, ng = 0;
  bool ok = header.size() >= 3 && header.front() == "iteration" && header.back() == "best_so_far";
  std::size_t col = 1;
  while (ok && col < header.size() && header[col] == "x" + std::to_string(dim + 1)) {
    ++dim;
    ++col;
  }
  ok = ok && col < header.size() && header[col] == "y";
  ++col;
  while (ok && col < header.size() && header[col] == "g" + std::to_string(ng + 1)) {
    ++ng;
    ++col;
  }
  if (!ok || col + 1 != header.size())
    throw ConfigError("unexpected trajectory header in " + path.string());

  Trajectory t;
  while (std::getline(in, line)) {
    if (line.empty())
      continue;
    const auto cells = split(line, ',');
    if (cells.size() != header.size())
      throw ConfigError("wrong column count in " + path.string());
    Evaluation e;
    e.index = static_cast<int>(parse_double(cells[0], path));
    e.x.resize(dim);
    for (int i = 0; i < dim; ++i)
      e.x[i] = parse_double(cells[static_cast<std::size_t>(1 + i)], path);
    e.y = parse_double(cells[static_cast<std::size_t>(1 + dim)], path);
    e.g.resize(ng);
    for (int i = 0; i < ng; ++i)
      e.g[i] = parse_double(cells[static_cast<std::size_t>(2 + dim + i)], path);
    t.evaluations.push_back(std::move(e));
  }
  t.budget = t.size();
  return t;
}

std::string scores_json(const ScoreTable& table) {
  json j;
  j["threshold"] = table.threshold;
  j["overall"] = json::object();
  for (const auto& [name, p] : table.overall)
    j["overall"][name] = p;
  j["problems"] = json::array();
  for (const auto& p : table.problems) {
    json jp;
    jp["problem"] = p.problem;
    jp["dim"] = p.dim;
    jp["n_constraints"] = p.n_constraints;
    jp["budget"] = p.budget.evaluations;
    jp["warmup"] = p.budget.warmup;
    jp["missing"] = p.missing;
    jp["algorithms"] = json::array();
    for (const auto& a : p.algorithms) {
      json ja;
      ja["algorithm"] = a.algorithm;
      ja["p"] = a.p;
      ja["completed"] = a.completed;
      ja["failed"] = a.failed;
      ja["feasible_fraction"] = a.violations.feasible_fraction;
      ja["mean_violation"] = a.violations.mean_violation;
      ja["evaluations"] = a.violations.evaluations;
      ja["violations"] = a.violations.violations;
      ja["final_mean_best"] = a.mean_best.back();
      ja["r"] = a.r;
      ja["mean_best"] = a.mean_best;
      jp["algorithms"].push_back(std::move(ja));
    }
    j["problems"].push_back(std::move(jp));
  }
  return j.dump(2) + "\n";
}

std::string convergence_csv(const ScoreTable& table) {
  std::string out = "problem,algorithm,iteration,mean,p10,p90\n";
  for (const auto& p : table.problems)
    for (const auto& a : p.algorithms)
      for (const auto& c : a.convergence)
        out += p.problem + "," + a.algorithm + "," + std::to_string(c.iteration) + "," + format_double(c.mean) +
               "," + format_double(c.p10) + "," + format_double(c.p90) + "\n";
  return out;
}

std::string feasibility_report(const ScoreTable& table) {
  std::ostringstream out;
  for (const auto& p : table.problems) {
    out << p.problem << " (d=" << p.dim << ", n_e=" << p.budget.evaluations << ", n_c=" << p.budget.warmup
        << ")\n";
    out << "  algorithm | p_a | feasible% | mean violation\n";
    for (const auto& a : p.algorithms) {
      char line[160];
      std::snprintf(line, sizeof line, "  %s | %.2f | %.2f%% | %.4g\n", a.algorithm.c_str(), a.p,
                    100.0 * a.violations.feasible_fraction, a.violations.mean_violation);
      out << line;
    }
    for (const auto& m : p.missing)
      out << "  " << m << " | no completed run\n";
  }
  return out.str();
}

// ---------------------------------------------------------------------------
// Config serialization
// ---------------------------------------------------------------------------

namespace {

json config_json(const BenchmarkConfig& c) {
  json j;
  j["suite"] = c.suite;
  j["algorithms"] = c.algorithms;
  j["problems"] = c.problems;
  j["dims"] = c.dims;
  j["repetitions"] = c.repetitions;
  j["budgets"] = json::object();
  for (const auto& [d, n] : c.budgets)
    j["budgets"][std::to_string(d)] = n;
  j["warmup"] = json::object();
  for (const auto& [d, n] : c.warmup)
    j["warmup"][std::to_string(d)] = n;
  j["seed"] = c.seed;
  j["violation_threshold"] = c.violation_threshold;
  j["jobs"] = c.jobs;
  return j;
}

std::map<int, int> dim_map(const json& j, const char* name) {
  if (!j.is_object())
    throw ConfigError(std::string(name) + " must be an object mapping dimension to count");
  std::map<int, int> out;
  for (const auto& [k, v] : j.items()) {
    int d = 0;
    try {
      std::size_t used = 0;
      d = std::stoi(k, &used);
      if (used != k.size())
        throw std::invalid_argument(k);
    } catch (const std::exception&) {
      throw ConfigError(std::string(name) + ": key '" + k + "' is not a dimension");
    }
    out[d] = v.get<int>();
  }
  return out;
}

} // namespace

std::string config_to_json(const BenchmarkConfig& config) { return config_json(config).dump(2) + "\n"; }

BenchmarkConfig config_from_json(std::string_view text) {
  json j;
  try {
    j = json::parse(text.begin(), text.end(), nullptr, true, true);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config parse error: ") + e.what());
  }
  if (!j.is_object())
    throw ConfigError("config must be a JSON object");
  static const std::vector<std::string> known{"suite", "algorithms", "problems", "dims", "repetitions",
                                              "budgets", "warmup", "seed", "violation_threshold", "jobs"};
  BenchmarkConfig c;
  try {
    for (const auto& [k, v] : j.items()) {
      if (k == "suite")
        c.suite = v.get<std::string>();
      else if (k == "algorithms")
        c.algorithms = v.get<std::vector<std::string>>();
      else if (k == "problems")
        c.problems = v.get<std::vector<std::string>>();
      else if (k == "dims")
        c.dims = v.get<std::vector<int>>();
      else if (k == "repetitions")
        c.repetitions = v.get<int>();
      else if (k == "budgets")
        c.budgets = dim_map(v, "budgets");
      else if (k == "warmup")
        c.warmup = dim_map(v, "warmup");
      else if (k == "seed")
        c.seed = v.get<std::uint64_t>();
      else if (k == "violation_threshold")
        c.violation_threshold = v.get<double>();
      else if (k == "jobs")
        c.jobs = v.get<int>();
      else {
        std::string msg = "unknown config key '" + k + "'";
        const std::string hint = nearest_key(k, known);
        if (!hint.empty())
          msg += " (did you mean '" + hint + "'?)";
        throw ConfigError(msg);
      }
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config type error: ") + e.what());
  }
  return c;
}

// ---------------------------------------------------------------------------
// Running
// ---------------------------------------------------------------------------

bool BenchmarkResult::all_ok() const {
  return std::all_of(cells.begin(), cells.end(), [](const CellStatus& s) { return s.ok; });
}

namespace {

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream ss;
  ss << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return ss.str();
}

json cell_json(const Cell& c) {
  json j;
  j["algorithm"] = c.algorithm;
  j["problem"] = c.problem;
  j["dim"] = c.dim;
  j["repetition"] = c.repetition;
  j["seed"] = c.seed;
  j["file"] = cell_file(c).generic_string();
  return j;
}

json comparable(json config) {
  config.erase("jobs");
  return config;
}

void write_manifest(const fs::path& directory, const BenchmarkConfig& config, const std::vector<Cell>& cells) {
  const fs::path path = directory / "manifest.json";
  const json cfg = config_json(config);
  if (fs::exists(path)) {
    const json existing = json::parse(read_file(path), nullptr, true, true);
    if (!existing.contains("config") || comparable(existing["config"]) != comparable(cfg))
      throw ConfigError(directory.string() + " already holds results for a different configuration");
    return;
  }
  json m;
  m["toolkit_version"] = toolkit_version();
  m["created"] = utc_timestamp();
  m["seed"] = config.seed;
  m["config"] = cfg;
  m["cells"] = json::array();
  for (const auto& c : cells)
    m["cells"].push_back(cell_json(c));
  write_atomically(path, m.dump(2) + "\n");
}

std::string status_json(const std::vector<CellStatus>& statuses) {
  json j;
  j["cells"] = json::array();
  for (const auto& s : statuses) {
    json c = cell_json(s.cell);
    c["status"] = s.ok ? "ok" : "failed";
    c["evaluations"] = s.evaluations;
    if (!s.message.empty())
      c["message"] = s.message;
    if (!s.notes.empty())
      c["notes"] = s.notes;
    j["cells"].push_back(std::move(c));
  }
  return j.dump(2) + "\n";
}

ScoreTable score_runs(const BenchmarkConfig& config, const std::vector<ProblemPlan>& plan,
                      const std::vector<Cell>& cells, const std::vector<Trajectory>& trajectories) {
  std::vector<ProblemScore> problems;
  for (const auto& p : plan) {
    std::vector<AlgorithmRuns> runs;
    for (const auto& a : p.algorithms) {
      AlgorithmRuns entry{a, {}};
      for (std::size_t i = 0; i < cells.size(); ++i)
        if (cells[i].problem == p.key && cells[i].algorithm == a)
          entry.runs.push_back(trajectories[i]);
      runs.push_back(std::move(entry));
    }
    problems.push_back(score_problem(p, runs, config.violation_threshold));
  }
  return score_table(std::move(problems), config.violation_threshold);
}

} // namespace

BenchmarkResult run_benchmark(const BenchmarkConfig& raw, const fs::path& directory,
                              const std::function<void(const CellStatus&)>& on_cell) {
  const BenchmarkConfig config = resolve_config(raw);
  const std::vector<ProblemPlan> plan = plan_benchmark(config);
  const std::vector<Cell> cells = benchmark_cells(config, plan);
  fs::create_directories(directory);
  write_manifest(directory, config, cells);

  std::map<std::string, const ProblemPlan*> by_key;
  for (const auto& p : plan)
    by_key[p.key] = &p;

  std::vector<Trajectory> trajectories(cells.size());
  std::vector<CellStatus> statuses(cells.size());
  std::atomic<std::size_t> next{0};
  std::mutex report_mutex;

  auto worker = [&] {
    for (std::size_t i = next++; i < cells.size(); i = next++) {
      const Cell& cell = cells[i];
      const ProblemPlan& p = *by_key.at(cell.problem);
      CellStatus status;
      status.cell = cell;
      try {
        const Problem problem = make_problem(cell.problem);
        RunOptions options;
        options.violation_threshold = config.violation_threshold;
        Trajectory t = run_optimizer(cell.algorithm, problem, p.budget.evaluations, cell.seed, options);
        status.notes = t.notes;
        status.evaluations = t.size();
        status.ok = t.size() == p.budget.evaluations;
        if (!status.ok)
          status.message = "run stopped after " + std::to_string(t.size()) + " evaluations";
        if (t.size() > 0)
          write_trajectory_csv(directory / cell_file(cell), t, p.dim, p.n_constraints, config.violation_threshold);
        trajectories[i] = std::move(t);
      } catch (const std::exception& e) {
        status.ok = false;
        status.message = e.what();
      }
      statuses[i] = status;
      if (on_cell) {
        std::lock_guard lock(report_mutex);
        on_cell(status);
      }
    }
  };

  int jobs = config.jobs > 0 ? config.jobs : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  jobs = std::min<int>(jobs, static_cast<int>(std::max<std::size_t>(1, cells.size())));
  if (jobs <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int j = 0; j < jobs; ++j)
      pool.emplace_back(worker);
  }

  write_atomically(directory / "status.json", status_json(statuses));
  BenchmarkResult result;
  result.scores = score_runs(config, plan, cells, trajectories);
  result.cells = std::move(statuses);
  write_atomically(directory / "scores.json", scores_json(result.scores));
  write_atomically(directory / "convergence.csv", convergence_csv(result.scores));
  return result;
}

BenchmarkConfig read_manifest_config(const fs::path& directory) {
  const fs::path path = directory / "manifest.json";
  if (!fs::exists(path))
    throw ConfigError("no manifest.json in " + directory.string());
  json m;
  try {
    m = json::parse(read_file(path), nullptr, true, true);
  } catch (const json::parse_error& e) {
    throw ConfigError("corrupt manifest " + path.string() + ": " + e.what());
  }
  if (!m.contains("config"))
    throw ConfigError("manifest " + path.string() + " has no config");
  return config_from_json(m["config"].dump());
}

ScoreTable rescore(const fs::path& directory) {
  if (!fs::is_directory(directory))
    throw ConfigError("results directory " + directory.string() + " does not exist");
  const BenchmarkConfig config = resolve_config(read_manifest_config(directory));
  const std::vector<ProblemPlan> plan = plan_benchmark(config);
  const std::vector<Cell> cells = benchmark_cells(config, plan);
  std::vector<Trajectory> trajectories(cells.size());
  for (std::size_t i = 0; i < cells.size(); ++i) {
    const fs::path path = directory / cell_file(cells[i]);
    if (fs::exists(path))
      trajectories[i] = read_trajectory_csv(path);
  }
  return score_runs(config, plan, cells, trajectories);
}

} // namespace sbopt

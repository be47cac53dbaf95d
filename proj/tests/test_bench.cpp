#include "sbopt/bench.hpp"
#include "sbopt/problems.hpp"
#include "scoring_oracle.hpp"

#include <doctest.h>

#include <cmath>
#include <fstream>
#include <sstream>

using namespace sbopt;
namespace fs = std::filesystem;

namespace {

Trajectory trajectory_from(const std::vector<double>& ys, const std::vector<double>& gs = {}) {
  Trajectory t;
  for (std::size_t k = 0; k < ys.size(); ++k) {
    Evaluation e;
    e.x = Vector{{0.1 * static_cast<double>(k), -0.5}};
    e.y = ys[k];
    if (!gs.empty())
      e.g = Vector{{gs[k]}};
    e.index = static_cast<int>(k) + 1;
    t.evaluations.push_back(e);
  }
  t.budget = static_cast<int>(ys.size());
  return t;
}

std::vector<AlgorithmRuns> to_runs(const oracle::RunSet& set, double scale = 1.0, double shift = 0.0) {
  std::vector<AlgorithmRuns> runs;
  for (std::size_t a = 0; a < set.size(); ++a) {
    AlgorithmRuns r{"alg" + std::to_string(a), {}};
    for (const auto& ys : set[a]) {
      std::vector<double> mapped;
      for (double y : ys)
        mapped.push_back(scale * y + shift);
      r.runs.push_back(trajectory_from(mapped));
    }
    runs.push_back(r);
  }
  return runs;
}

ProblemPlan plan_d2() { return ProblemPlan{"synthetic", 2, 0, {20, 5}, {}}; }

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("sbopt-test-" + name);
  fs::remove_all(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

} // namespace

TEST_CASE("score_r and score_p examples") {
  CHECK(score_r(10.0, 2.0, 4.0) == 0.75);
  CHECK(score_r(10.0, 2.0, 2.0) == 1.0);
  CHECK(score_r(10.0, 2.0, 10.0) == 0.0);
  CHECK(score_r(3.0, 3.0, 3.0) == 1.0);
  const std::vector<double> ones{1.0, 1.0, 1.0}, half{0.0, 1.0}, none;
  CHECK(score_p(ones) == 1.0);
  CHECK(score_p(half) == 0.5);
  CHECK_THROWS_AS(score_p(none), ConfigError);
}

TEST_CASE("count_violations example") {
  const std::vector<double> g{0.0005, 0.002, -1.0};
  const ViolationStats s = count_violations(g);
  CHECK(s.violations == 1);
  CHECK(s.evaluations == 3);
  CHECK(s.feasible_fraction == doctest::Approx(2.0 / 3.0));
  CHECK(s.mean_violation == doctest::Approx(0.002));
  const std::vector<double> clean{-1.0, 0.0};
  CHECK(count_violations(clean).mean_violation == 0.0);
  CHECK(count_violations(clean).feasible_fraction == 1.0);
  CHECK(count_violations(trajectory_from({1, 2, 3}, {0.0005, 0.002, -1.0})).violations == 1);
  CHECK(count_violations(trajectory_from({1, 2, 3})).feasible_fraction == 1.0);
}

TEST_CASE("aligned best-so-far") {
  const Trajectory t = trajectory_from({5.0, 7.0, 1.0, 3.0, 0.5}, {0.5, -1.0, 0.2, -1.0, -1.0});
  CHECK(aligned_best_so_far(t, false) == std::vector<double>{5.0, 5.0, 1.0, 1.0, 0.5});
  CHECK(aligned_best_so_far(t, true) == std::vector<double>{7.0, 7.0, 7.0, 3.0, 0.5});
  const auto curve = aligned_best_so_far(t, true);
  for (std::size_t k = 1; k < curve.size(); ++k)
    CHECK(curve[k] <= curve[k - 1]);
}

TEST_CASE("percentile and convergence statistics") {
  CHECK(percentile({1.0, 2.0, 3.0, 4.0, 5.0}, 0.1) == doctest::Approx(1.4));
  CHECK(percentile({1.0, 2.0, 3.0, 4.0, 5.0}, 0.9) == doctest::Approx(4.6));
  CHECK(percentile({7.0}, 0.5) == 7.0);
  CHECK_THROWS_AS(percentile({}, 0.5), ConfigError);
  const auto stats = convergence_statistics({{3.0, 2.0}, {1.0, 0.0}});
  REQUIRE(stats.size() == 2);
  CHECK(stats[0].iteration == 1);
  CHECK(stats[0].mean == 2.0);
  CHECK(stats[1].p10 == doctest::Approx(0.2));
}

TEST_CASE("score_problem matches the independent scorer") {
  for (const auto& set : oracle::synthetic_sets()) {
    const ProblemScore s = score_problem(plan_d2(), to_runs(set), 1e-3);
    const std::vector<double> want = oracle::score_p(set, 5);
    REQUIRE(s.algorithms.size() == want.size());
    for (std::size_t a = 0; a < want.size(); ++a) {
      CHECK(std::abs(s.algorithms[a].p - want[a]) < 1e-12);
      CHECK(s.algorithms[a].r.size() == 15);
      for (double r : s.algorithms[a].r) {
        CHECK(r >= 0.0);
        CHECK(r <= 1.0);
      }
    }
  }
  const auto tie = oracle::synthetic_sets()[1];
  for (const auto& a : score_problem(plan_d2(), to_runs(tie), 1e-3).algorithms)
    CHECK(a.p == 1.0);
}

TEST_CASE("single algorithm scores 1 and scores are affine invariant") {
  const auto set = oracle::synthetic_sets()[0];
  const oracle::RunSet single{set[1]};
  CHECK(score_problem(plan_d2(), to_runs(single), 1e-3).algorithms[0].p == 1.0);
  const ProblemScore base = score_problem(plan_d2(), to_runs(set), 1e-3);
  const ProblemScore moved = score_problem(plan_d2(), to_runs(set, 3.5, -12.0), 1e-3);
  for (std::size_t a = 0; a < base.algorithms.size(); ++a)
    CHECK(std::abs(base.algorithms[a].p - moved.algorithms[a].p) < 1e-12);
}

TEST_CASE("incomplete runs are excluded and reported") {
  auto runs = to_runs(oracle::synthetic_sets()[0]);
  runs[0].runs[1].evaluations.resize(12);
  runs[2].runs.clear();
  const ProblemScore s = score_problem(plan_d2(), runs, 1e-3);
  REQUIRE(s.algorithms.size() == 2);
  CHECK(s.algorithms[0].completed == 2);
  CHECK(s.algorithms[0].failed == 1);
  CHECK(s.missing == std::vector<std::string>{"alg2"});
  const ScoreTable table = score_table({s}, 1e-3);
  CHECK(table.overall.size() == 2);
  CHECK(feasibility_report(table).find("alg2 | no completed run") != std::string::npos);
}

TEST_CASE("trajectory CSV round-trip") {
  Trajectory t = trajectory_from({1.0 / 3.0, -2.5e-17, 4.0}, {0.1, -0.2, 1e-300});
  const fs::path dir = scratch("csv");
  write_trajectory_csv(dir / "t.csv", t, 2, 1);
  const Trajectory back = read_trajectory_csv(dir / "t.csv");
  REQUIRE(back.size() == 3);
  for (int k = 0; k < 3; ++k) {
    const auto& a = t.evaluations[static_cast<std::size_t>(k)];
    const auto& b = back.evaluations[static_cast<std::size_t>(k)];
    CHECK(a.x == b.x);
    CHECK(a.y == b.y);
    CHECK(a.g == b.g);
    CHECK(a.index == b.index);
  }
  const std::string csv = trajectory_csv(t, 2, 1);
  CHECK(csv.rfind("iteration,x1,x2,y,g1,best_so_far\n", 0) == 0);
  fs::remove_all(dir);
}

TEST_CASE("config JSON round-trip and validation") {
  BenchmarkConfig c;
  c.suite = "custom";
  c.algorithms = {"lsqm", "bo"};
  c.problems = {"levy-d2"};
  c.repetitions = 2;
  c.budgets = {{2, 12}};
  c.warmup = {{2, 3}};
  c.seed = 99;
  c.jobs = 3;
  const BenchmarkConfig back = config_from_json(config_to_json(c));
  CHECK(back.suite == c.suite);
  CHECK(back.algorithms == c.algorithms);
  CHECK(back.problems == c.problems);
  CHECK(back.repetitions == 2);
  CHECK(back.budgets == c.budgets);
  CHECK(back.warmup == c.warmup);
  CHECK(back.seed == 99);
  CHECK(back.jobs == 3);
  CHECK(config_from_json("// comment\n{ \"repetitions\": /* inline */ 3 }").repetitions == 3);
  CHECK_THROWS_AS(config_from_json("{\"repetitons\": 3}"), ConfigError);
  CHECK_THROWS_AS(config_from_json("{"), ConfigError);

  BenchmarkConfig bad = c;
  bad.warmup = {{2, 12}};
  CHECK_THROWS_AS(plan_benchmark(bad), ConfigError);
  bad = c;
  bad.repetitions = 0;
  CHECK_THROWS_AS(plan_benchmark(bad), ConfigError);
  bad = c;
  bad.algorithms = {"bo", "bo"};
  CHECK_THROWS_AS(plan_benchmark(bad), ConfigError);
  bad = c;
  bad.problems = {"matyas-c"};
  bad.algorithms = {"bo", "lsqm"};
  CHECK_THROWS_AS(plan_benchmark(bad), ConfigError);
}

TEST_CASE("planning") {
  CHECK(default_budget(2).evaluations == 20);
  CHECK(default_budget(7).warmup == 13);
  CHECK(default_budget(32).evaluations == 150);
  CHECK_THROWS_AS(default_budget(4), ConfigError);

  BenchmarkConfig c;
  c.suite = "constrained";
  const auto plan = plan_benchmark(c);
  REQUIRE(plan.size() == 3);
  for (const auto& p : plan) {
    CHECK(p.n_constraints == 1);
    CHECK(p.algorithms == std::vector<std::string>{"cbo", "cuatro", "cobyla", "cobyqa"});
  }
  BenchmarkConfig u;
  u.dims = {2};
  const auto cells = benchmark_cells(u, plan_benchmark(u));
  CHECK(cells.size() == 4 * 7 * 5);
  CHECK(cells.front().repetition == 1);
  CHECK(cells.front().seed == cell_seed(0, cells.front().algorithm, cells.front().problem, 2, 1));
  CHECK(cell_seed(0, "bo", "levy-d2", 2, 1) != cell_seed(0, "bo", "levy-d2", 2, 2));
  CHECK(cell_seed(0, "bo", "levy-d2", 2, 1) != cell_seed(1, "bo", "levy-d2", 2, 1));
}

TEST_CASE("run_benchmark writes a reproducible results directory") {
  BenchmarkConfig c;
  c.suite = "custom";
  c.problems = {"rosenbrock-d2", "matyas-c"};
  c.algorithms = {"lsqm", "cobyqa", "dycors"};
  c.repetitions = 2;
  c.seed = 5;
  c.jobs = 2;
  const fs::path dir = scratch("run");
  const BenchmarkResult r = run_benchmark(c, dir);
  CHECK(r.all_ok());
  CHECK(r.cells.size() == 2 * 3 + 2 * 1);
  for (const char* f : {"manifest.json", "status.json", "scores.json", "convergence.csv"})
    CHECK(fs::exists(dir / f));
  const Trajectory t = read_trajectory_csv(dir / "rosenbrock-d2" / "lsqm" / "rep1.csv");
  CHECK(t.size() == 20);
  CHECK(scores_json(rescore(dir)) == slurp(dir / "scores.json"));
  CHECK(read_manifest_config(dir).problems == c.problems);

  const std::string first = slurp(dir / "scores.json");
  const std::string traj = slurp(dir / "matyas-c" / "cobyqa" / "rep2.csv");
  fs::remove(dir / "scores.json");
  fs::remove(dir / "matyas-c" / "cobyqa" / "rep2.csv");
  c.jobs = 1;
  run_benchmark(c, dir);
  CHECK(slurp(dir / "scores.json") == first);
  CHECK(slurp(dir / "matyas-c" / "cobyqa" / "rep2.csv") == traj);

  BenchmarkConfig other = c;
  other.seed = 6;
  CHECK_THROWS_AS(run_benchmark(other, dir), ConfigError);
  fs::remove_all(dir);
}

#include "sbopt/optimizers.hpp"
#include "sbopt/problems.hpp"
#include "sbopt/search.hpp"
#include "sbopt/surrogates.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace sbopt;

namespace {

Dataset sample(const std::function<Response(const Vector&)>& fn, const Matrix& X, int n_constraints) {
  Dataset d(static_cast<int>(X.cols()), n_constraints);
  for (int i = 0; i < X.rows(); ++i) {
    const Vector x = X.row(i).transpose();
    const Response r = fn(x);
    d.add(x, r.f, r.g);
  }
  return d;
}

Matrix grid_1d(double lo, double hi, int n) {
  Matrix X(n, 1);
  for (int i = 0; i < n; ++i)
    X(i, 0) = lo + (hi - lo) * i / (n - 1);
  return X;
}

double nearest_distance(const Dataset& d, const Vector& x) {
  return (d.X().rowwise() - x.transpose()).rowwise().norm().minCoeff();
}

// Brute-force minimizer of a 2-D quadratic model over ball and box: coarse grid, then refinement.
Vector grid_argmin(const QuadModel& q, const Vector& center, double radius, const Bounds& box) {
  Vector best = center;
  double best_v = q(center);
  Vector lo = box.lower(), hi = box.upper();
  for (int level = 0; level < 6; ++level) {
    const int n = 101;
    Vector new_best = best;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        const Vector x{{lo[0] + (hi[0] - lo[0]) * i / (n - 1), lo[1] + (hi[1] - lo[1]) * j / (n - 1)}};
        if ((x - center).norm() > radius || !box.contains(x))
          continue;
        const double v = q(x);
        if (v < best_v) {
          best_v = v;
          new_best = x;
        }
      }
    best = new_best;
    const Vector half = 0.04 * (hi - lo);
    lo = (best - half).cwiseMax(box.lower());
    hi = (best + half).cwiseMin(box.upper());
  }
  return best;
}

} // namespace

TEST_CASE("lcb arithmetic and monotonicity") {
  CHECK(lcb(1.0, 0.5, 2.0) == 0.0);
  CHECK(lcb(3.2, 7.0, 0.0) == 3.2);
  CHECK(lcb(0.0, 1.0, 1.96) == doctest::Approx(-1.96));
  CHECK_THROWS_AS(lcb(0.0, -1.0, 1.0), ConfigError);
  CHECK(lcb(0.5, 1.0, 2.0) <= lcb(0.6, 1.0, 2.0));
  CHECK(lcb(0.5, 1.1, 2.0) <= lcb(0.5, 1.0, 2.0));
}

TEST_CASE("propose_bo with gamma 0 finds the minimizer of a dense noiseless quadratic") {
  const Bounds b = Bounds::uniform(1, -1.0, 1.0);
  const Dataset d = sample([](const Vector& x) { return Response{(x[0] - 0.3) * (x[0] - 0.3), Vector()}; },
                           grid_1d(-1.0, 1.0, 15), 0);
  AcquisitionConfig cfg;
  cfg.gamma = 0.0;
  const Vector x = propose_bo(d, b, cfg, 5);
  CHECK(std::abs(x[0] - 0.3) < 0.1);
  CHECK(x == propose_bo(d, b, cfg, 5));
  const double incumbent = d.y().minCoeff();
  CHECK((x[0] - 0.3) * (x[0] - 0.3) <= incumbent + 1e-6);
}

TEST_CASE("propose_bo with huge gamma picks the most uncertain region") {
  const Bounds b = Bounds::uniform(1, -1.0, 1.0);
  Matrix X(3, 1);
  X << 0.0, 0.01, 0.02;
  const Dataset d = sample([](const Vector& x) { return Response{x[0], Vector()}; }, X, 0);
  AcquisitionConfig cfg;
  cfg.gamma = 1e6;
  const Vector x = propose_bo(d, b, cfg, 9);
  const Matrix pool = acquisition_candidates(d, b, 100, 9);
  double farthest = 0.0;
  for (int i = 0; i < pool.rows(); ++i)
    farthest = std::max(farthest, nearest_distance(d, pool.row(i).transpose()));
  CHECK(nearest_distance(d, x) >= farthest - 1e-9);
  CHECK(b.contains(x));
}

TEST_CASE("acquisition pool has the documented composition") {
  const Bounds b = Bounds::uniform(2, 0.0, 1.0);
  const Dataset d = sample([](const Vector& x) { return Response{x.squaredNorm(), Vector()}; },
                           latin_hypercube(b, 6, 1), 0);
  const Matrix pool = acquisition_candidates(d, b, 0, 3);
  CHECK(pool.rows() == 201);
  for (int i = 0; i < pool.rows(); ++i)
    CHECK(b.contains(pool.row(i).transpose()));
  int best = 0;
  d.y().minCoeff(&best);
  bool has_incumbent = false;
  for (int i = 0; i < pool.rows(); ++i)
    has_incumbent = has_incumbent || (pool.row(i) - d.X().row(best)).norm() == 0.0;
  CHECK(has_incumbent);
}

TEST_CASE("propose_cbo equals propose_bo when every constraint is slack") {
  const Bounds b = Bounds::uniform(2, -1.0, 1.0);
  const auto fn = [](const Vector& x) { return Response{(x - Vector{{0.2, -0.1}}).squaredNorm(), Vector{{-10.0 - x[0]}}}; };
  const Dataset d = sample(fn, latin_hypercube(b, 8, 4), 1);
  Dataset unconstrained(2, 0);
  for (int i = 0; i < d.size(); ++i)
    unconstrained.add(d.X().row(i).transpose(), d.y()[i]);
  const AcquisitionConfig cfg;
  CHECK(propose_cbo(d, b, cfg, 11) == propose_bo(unconstrained, b, cfg, 11));
}

TEST_CASE("propose_cbo respects a dense linear constraint") {
  const Bounds b = Bounds::uniform(1, -1.0, 1.0);
  const auto fn = [](const Vector& x) { return Response{(x[0] - 0.5) * (x[0] - 0.5), Vector{{x[0]}}}; };
  const Dataset d = sample(fn, grid_1d(-1.0, 1.0, 21), 1);
  const Vector x = propose_cbo(d, b, AcquisitionConfig{}, 2);
  CHECK(x[0] <= 1e-2);
  CHECK(x[0] >= -0.1);
}

TEST_CASE("propose_cbo falls back to the least predicted violation") {
  const Bounds b = Bounds::uniform(1, -1.0, 1.0);
  const auto fn = [](const Vector& x) { return Response{x[0], Vector{{1.0 + x[0] * x[0]}}}; };
  const Dataset d = sample(fn, grid_1d(-1.0, 1.0, 11), 1);
  const Vector x = propose_cbo(d, b, AcquisitionConfig{}, 3);
  CHECK(std::abs(x[0]) < 0.1);
}

TEST_CASE("trust-region subproblem matches brute force, including indefinite and hard cases") {
  Rng rng(5);
  std::normal_distribution<double> n(0.0, 1.0);
  const Bounds wide = Bounds::uniform(2, -100.0, 100.0);
  for (int t = 0; t < 30; ++t) {
    Matrix A(2, 2);
    A << n(rng), n(rng), n(rng), n(rng);
    Matrix H = A + A.transpose();
    Vector g{{n(rng), n(rng)}};
    if (t == 0) {
      H = Matrix{{-2.0, 0.0}, {0.0, 1.0}};
      g = Vector{{0.0, 1.0}};
    }
    const double r = 0.5 + std::abs(n(rng));
    const Vector s = search::solve_trust_region_subproblem(H, g, r);
    CHECK(s.norm() <= r * (1.0 + 1e-9));
    QuadModel q{0.5 * H, g, 0.0};
    const Vector oracle = grid_argmin(q, Vector::Zero(2), r, wide);
    CHECK(q(s) <= q(oracle) + 1e-6);
  }
}

TEST_CASE("lsqm_step examples") {
  const Bounds b = Bounds::uniform(1, -5.0, 5.0);
  const Dataset d = sample([](const Vector& x) { return Response{x[0] * x[0], Vector()}; }, grid_1d(-1.0, 2.0, 4), 0);
  TrustRegionState tr = make_trust_region(b, Vector{{0.5}});
  tr.radius = 2.0;
  CHECK(std::abs(lsqm_step(d, b, tr).x[0]) < 1e-3);

  const Bounds b2 = Bounds::uniform(2, -5.0, 5.0);
  const Dataset lin = sample([](const Vector& x) { return Response{3.0 * x[0] + 1e-3 * x.squaredNorm(), Vector()}; },
                             latin_hypercube(b2, 8, 2), 0);
  TrustRegionState t2 = make_trust_region(b2, Vector{{0.0, 0.0}});
  t2.radius = 0.5;
  const Proposal p = lsqm_step(lin, b2, t2);
  CHECK(std::abs(p.x.norm() - 0.5) < 1e-6);
  CHECK(p.on_boundary);
  CHECK(p.predicted_reduction > 0.0);
}

TEST_CASE("lsqm_step on the 2-D ill-conditioned quadratic matches a grid oracle on the surrogate") {
  const Problem prob = make_problem("quadratic-d2");
  const Bounds& b = prob.bounds();
  const Dataset d = sample([&](const Vector& x) { return prob(x); }, latin_hypercube(b, 10, 8), 0);
  TrustRegionState tr = make_trust_region(b, d.X().row(0).transpose());
  tr.radius = 20.0;
  const Proposal p = lsqm_step(d, b, tr, 1);
  const QuadModel q = fit_quadratic(d.X(), d.y(), 1e-8, true);
  const Vector oracle = grid_argmin(q, tr.center, tr.radius, b);
  CHECK((p.x - oracle).norm() < 1e-2);
}

TEST_CASE("cuatro_step without constraints equals lsqm_step") {
  const Bounds b = Bounds::uniform(2, -5.0, 5.0);
  const Dataset d = sample([](const Vector& x) { return Response{levy(x), Vector()}; }, latin_hypercube(b, 7, 3), 0);
  TrustRegionState tr = make_trust_region(b, d.X().row(2).transpose());
  CHECK(cuatro_step(d, b, tr, MeritConfig::uniform(0), 4).x == lsqm_step(d, b, tr, 4).x);
}

TEST_CASE("cuatro_step keeps the model constraint and the ball") {
  const Bounds b = Bounds::uniform(2, -5.0, 5.0);
  const auto fn = [](const Vector& x) {
    return Response{(x[0] - 1.0) * (x[0] - 1.0) + x[1] * x[1], Vector{{x[0]}}};
  };
  const Dataset d = sample(fn, latin_hypercube(b, 10, 6), 1);
  TrustRegionState tr = make_trust_region(b, Vector{{-1.0, 0.5}});
  tr.radius = 5.0;
  const Proposal p = cuatro_step(d, b, tr, MeritConfig::uniform(1), 1);
  CHECK(p.x[0] <= 1e-3);
  CHECK(p.x[0] >= -0.05);
  CHECK(std::abs(p.x[1]) < 0.05);

  tr.radius = 0.2;
  const Proposal small = cuatro_step(d, b, tr, MeritConfig::uniform(1), 1);
  CHECK(std::abs((small.x - tr.center).norm() - 0.2) < 1e-6);
}

TEST_CASE("cobyla_step closed-form examples") {
  const Bounds b = Bounds::uniform(2, -5.0, 5.0);
  Matrix S(3, 2);
  S << 0.0, 0.0, 0.1, 0.0, 0.0, 0.1;
  const Dataset simplex = sample([](const Vector& x) { return Response{x[0], Vector()}; }, S, 0);
  TrustRegionState tr = make_trust_region(b, Vector{{0.0, 0.0}});
  tr.radius = 1.0;
  const Proposal p = cobyla_step(simplex, b, tr, MeritConfig::uniform(0));
  CHECK((p.x - Vector{{-0.5, 0.0}}).norm() < 1e-9);

  CHECK(merit_max(1.0, Vector{{0.5, -0.2}}, 1.0) == doctest::Approx(1.5));

  const auto fn = [](const Vector& x) { return Response{x[0] + x[1], Vector{{-x[0] - 0.1}}}; };
  const Dataset cs = sample(fn, S, 1);
  const MeritConfig merit = MeritConfig::uniform(1, 1e3);
  const Proposal q = cobyla_step(cs, b, tr, merit);
  CHECK(q.x[0] >= -0.1 - 1e-3);
  CHECK((q.x - tr.center).norm() <= 0.5 + 1e-9);
  const Vector free_step = -0.5 * Vector{{1.0, 1.0}} / std::sqrt(2.0);
  const auto phi = [&](const Vector& x) { return merit_max(fn(x).f, fn(x).g, 1e3); };
  CHECK(phi(q.x) <= phi(free_step) + 1e-9);
}

TEST_CASE("cobyqa_step examples") {
  const Bounds b = Bounds::uniform(2, -5.0, 5.0);
  const Vector xmin{{0.4, -0.3}};
  const auto quad = [&](const Vector& x) { return (x - xmin).squaredNorm() + 0.5 * (x[0] - xmin[0]) * (x[1] - xmin[1]); };
  const Matrix X = latin_hypercube(b, 9, 12);
  const Dataset d0 = sample([&](const Vector& x) { return Response{quad(x), Vector()}; }, X, 0);
  TrustRegionState tr = make_trust_region(b, Vector{{0.0, 0.0}});
  tr.radius = 2.0;
  const Proposal p = cobyqa_step(d0, b, tr, MeritConfig::uniform(0), 1);
  CHECK((p.x - xmin).norm() < 1e-3);

  const Dataset d1 = sample([&](const Vector& x) { return Response{quad(x), Vector{{-20.0 + x[0]}}}; }, X, 1);
  const Proposal p1 = cobyqa_step(d1, b, tr, MeritConfig::uniform(1), 1);
  CHECK((p1.x - p.x).norm() < 1e-8);

  const Problem qc = make_problem("quadratic-c");
  const Dataset dq = sample([&](const Vector& x) { return qc(x); }, latin_hypercube(qc.bounds(), 10, 3), 1);
  int ci = 0;
  dq.y().minCoeff(&ci);
  TrustRegionState tq = make_trust_region(qc.bounds(), dq.X().row(ci).transpose());
  const MeritConfig merit = MeritConfig::uniform(1);
  const Proposal pq = cobyqa_step(dq, qc.bounds(), tq, merit, 2);
  const auto merit_at = [&](const Vector& x) {
    const Response r = qc(x);
    return merit_sum(r.f, r.g, merit);
  };
  CHECK(merit_at(pq.x) <= merit_at(tq.center) + 1e-9);
}

TEST_CASE("trust-region steps stay inside ball and box") {
  const Problem prob = make_problem("rosenbrock-c");
  const Bounds& b = prob.bounds();
  Rng rng(77);
  std::uniform_real_distribution<double> u(-5.0, 5.0), rad(0.05, 3.0);
  for (int t = 0; t < 10; ++t) {
    const Dataset d = sample([&](const Vector& x) { return prob(x); }, latin_hypercube(b, 8, 100 + t), 1);
    TrustRegionState tr = make_trust_region(b, Vector{{u(rng), u(rng)}});
    tr.radius = rad(rng);
    const MeritConfig m = MeritConfig::uniform(1);
    for (const Proposal& p : {lsqm_step(d, b, tr, t), cuatro_step(d, b, tr, m, t), cobyqa_step(d, b, tr, m, t)}) {
      CHECK((p.x - tr.center).norm() <= tr.radius + 1e-9);
      CHECK(b.contains(p.x));
    }
    const Dataset simplex = d.subset(std::vector<int>{0, 1, 2});
    const Proposal pc = cobyla_step(simplex, b, tr, m, t);
    CHECK((pc.x - tr.center).norm() <= 0.5 * tr.radius + 1e-9);
    CHECK(b.contains(pc.x));
  }
}

TEST_CASE("trust_region_update rules") {
  const Bounds b = Bounds::uniform(1, -10.0, 10.0);
  TrustRegionState tr = make_trust_region(b, Vector{{0.0}});
  tr.radius = 1.0;
  const Vector x{{1.0}};
  CHECK(trust_region_update(tr, 1.0, 0.9, true, x).radius == 2.0);
  CHECK(trust_region_update(tr, 1.0, 0.1, true, x).radius == 0.5);
  CHECK(trust_region_update(tr, 1.0, 0.5, false, x).radius == 1.0);
  CHECK(trust_region_update(tr, 0.0, 0.5, false, x).radius == 0.5);
  CHECK(trust_region_update(tr, 1.0, 0.5, false, x).center == x);
  CHECK(trust_region_update(tr, 1.0, -0.5, false, x).center == tr.center);
  CHECK(trust_region_update(tr, 1.0, 0.9, false, x, false).center == tr.center);
  tr.radius = tr.max_radius;
  CHECK(trust_region_update(tr, 1.0, 1.0, true, x).radius == tr.max_radius);
  tr.radius = tr.min_radius;
  CHECK(trust_region_update(tr, 1.0, -1.0, true, x).radius == tr.min_radius);
}

TEST_CASE("trust_region_update never moves the center uphill") {
  Rng rng(8);
  std::normal_distribution<double> n(0.0, 1.0);
  const Bounds b = Bounds::uniform(1, -10.0, 10.0);
  for (int t = 0; t < 200; ++t) {
    const TrustRegionState tr = make_trust_region(b, Vector{{0.0}});
    const double f_center = n(rng), f_new = n(rng);
    const TrustRegionState out = trust_region_update(tr, std::abs(n(rng)), f_center - f_new, false, Vector{{1.0}});
    if (out.center[0] == 1.0)
      CHECK(f_new < f_center);
  }
}

TEST_CASE("make_trust_region defaults") {
  const Bounds b(Vector{{0.0, 0.0}}, Vector{{2.0, 4.0}});
  const TrustRegionState tr = make_trust_region(b, Vector{{1.0, 1.0}});
  CHECK(tr.radius == doctest::Approx(0.3));
  CHECK(tr.min_radius == doctest::Approx(3e-6));
  CHECK(tr.max_radius == doctest::Approx(3.0));
}

TEST_CASE("merit helpers and penalty growth") {
  const MeritConfig m = MeritConfig::uniform(2, 10.0);
  CHECK(merit_sum(1.0, Vector{{0.5, -1.0}}, m) == doctest::Approx(6.0));
  CHECK(merit_max(1.0, Vector{{-0.5, -1.0}}, 10.0) == 1.0);
  const MeritConfig g = grow_penalties(m, Vector{{0.5, 0.0005}});
  CHECK(g.penalties[0] == doctest::Approx(100.0));
  CHECK(g.penalties[1] == doctest::Approx(10.0));
  MeritConfig capped = MeritConfig::uniform(1, 5e7);
  capped = grow_penalties(capped, Vector{{1.0}});
  CHECK(capped.penalties[0] == 1e8);
  CHECK(MeritConfig::uniform(0).max_penalty() == 1.0);
  CHECK_THROWS_AS(merit_sum(0.0, Vector{{1.0}}, MeritConfig::uniform(2)), ConfigError);
}

TEST_CASE("simplex helpers") {
  Matrix good(3, 2);
  good << 0, 0, 1, 0, 0, 1;
  CHECK_FALSE(simplex_degenerate(good));
  Matrix flat(3, 2);
  flat << 0, 0, 1, 1, 2, 2;
  CHECK(simplex_degenerate(flat));
  const Bounds b = Bounds::uniform(2, 0.0, 1.0);
  const Matrix s = regular_simplex(Vector{{0.95, 0.5}}, 0.1, b);
  CHECK(s.rows() == 3);
  CHECK_FALSE(simplex_degenerate(s));
  for (int i = 0; i < 3; ++i)
    CHECK(b.contains(s.row(i).transpose()));
  CHECK(s(1, 0) == doctest::Approx(0.85));
}

TEST_CASE("DYCORS perturbation probability and weights") {
  DycorsState s;
  s.max_iterations = 15;
  CHECK(perturbation_probability(s, 2) == 1.0);
  CHECK(perturbation_probability(s, 40) == doctest::Approx(0.5));
  s.iteration = 15;
  CHECK(perturbation_probability(s, 2) == doctest::Approx(0.0));
  s.iteration = 3;
  CHECK(perturbation_probability(s, 2) == doctest::Approx(1.0 - std::log(4.0) / std::log(15.0)));
  for (int i = 0; i < 8; ++i) {
    s.weight_cycle_index = i;
    CHECK(dycors_weight(s) == kDycorsWeights[i % 4]);
  }
}

TEST_CASE("DYCORS scoring example") {
  const std::vector<double> vf{0.0, 1.0}, vd{1.0, 0.0};
  const auto s = dycors_scores(vf, vd, 0.95);
  CHECK(s[0] == doctest::Approx(0.0));
  CHECK(s[1] == doctest::Approx(1.0));
  const std::vector<double> raw{3.0, 5.0, 4.0}, flat{2.0, 2.0};
  CHECK(min_max_scale(raw) == std::vector<double>{0.0, 1.0, 0.5});
  CHECK(min_max_scale(flat) == std::vector<double>{0.0, 0.0});
}

TEST_CASE("DYCORS step-size rule") {
  DycorsState s;
  s.max_iterations = 100;
  s.step_size = 0.2;
  s.initial_step_size = 0.2;
  for (int i = 0; i < 3; ++i)
    s = dycors_update(s, true);
  CHECK(s.step_size == doctest::Approx(0.4));
  for (int i = 0; i < 5; ++i)
    s = dycors_update(s, false);
  CHECK(s.step_size == doctest::Approx(0.2));
  for (int i = 0; i < 200; ++i)
    s = dycors_update(s, false);
  CHECK(s.step_size >= 0.2 * 1e-3 - 1e-15);
  CHECK(s.iteration == s.max_iterations);
}

TEST_CASE("DYCORS step perturbs the incumbent, stays in bounds and is deterministic") {
  const Bounds b = Bounds::uniform(5, -5.0, 5.0);
  const Dataset d = sample([](const Vector& x) { return Response{ackley(x), Vector()}; }, latin_hypercube(b, 10, 1), 0);
  DycorsState s;
  s.max_iterations = 40;
  for (int t = 0; t < 20; ++t) {
    s.iteration = t;
    const Vector inc = d.X().row(t % 10).transpose();
    const Vector x = dycors_step(d, b, s, inc, t);
    CHECK(b.contains(x));
    CHECK((x - inc).cwiseAbs().maxCoeff() > 0.0);
    CHECK(x == dycors_step(d, b, s, inc, t));
  }
}

TEST_CASE("run_optimizer honours the budget exactly and is reproducible") {
  const Problem p = make_problem("rosenbrock-d2");
  const Problem pc = make_problem("matyas-c");
  for (Algorithm a : all_algorithms()) {
    const Trajectory t = run_optimizer(a, p, 20, 42);
    CHECK(t.size() == 20);
    for (int k = 0; k < t.size(); ++k) {
      CHECK(t.evaluations[static_cast<std::size_t>(k)].index == k + 1);
      CHECK(p.bounds().contains(t.evaluations[static_cast<std::size_t>(k)].x));
    }
    const Trajectory again = run_optimizer(a, p, 20, 42);
    for (int k = 0; k < t.size(); ++k) {
      CHECK(again.evaluations[static_cast<std::size_t>(k)].x == t.evaluations[static_cast<std::size_t>(k)].x);
      CHECK(again.evaluations[static_cast<std::size_t>(k)].y == t.evaluations[static_cast<std::size_t>(k)].y);
    }
    if (handles_constraints(a))
      CHECK(run_optimizer(a, pc, 20, 1).size() == 20);
  }
}

TEST_CASE("run_optimizer rejects budgets below the initial design") {
  const Problem p = make_problem("ackley-d5");
  CHECK(initial_design_size(Algorithm::bo, 5) == 10);
  CHECK(initial_design_size(Algorithm::lsqm, 5) == 6);
  CHECK(initial_design_size(Algorithm::dycors, 2) == 5);
  CHECK_THROWS_AS(run_optimizer(Algorithm::bo, p, 9, 1), ConfigError);
  CHECK_THROWS_AS(run_optimizer("nope", p, 50, 1), ConfigError);
}

TEST_CASE("run_optimizer stops on an evaluation failure and records it") {
  int calls = 0;
  const Problem p("flaky", Bounds::uniform(2, -1.0, 1.0), 0, [&calls](const Vector& x) {
    ++calls;
    return Response{calls > 7 ? std::numeric_limits<double>::infinity() : x.squaredNorm(), Vector()};
  });
  const Trajectory t = run_optimizer(Algorithm::lsqm, p, 20, 1);
  CHECK(t.size() == 7);
  CHECK_FALSE(t.notes.empty());
}

TEST_CASE("run_optimizer falls back to random search when a strategy breaks") {
  // A constant objective makes every surrogate degenerate; the run must still complete.
  const Problem flat("flat", Bounds::uniform(3, 0.0, 1.0), 0, [](const Vector&) { return Response{1.0, Vector()}; });
  for (Algorithm a : all_algorithms())
    CHECK(run_optimizer(a, flat, 20, 3).size() == 20);
}

TEST_CASE("final_incumbent prefers feasible points") {
  Trajectory t;
  t.evaluations.push_back({Vector{{0.0}}, -5.0, Vector{{0.5}}, 1});
  t.evaluations.push_back({Vector{{1.0}}, 2.0, Vector{{0.0005}}, 2});
  t.evaluations.push_back({Vector{{2.0}}, 3.0, Vector{{-1.0}}, 3});
  CHECK(final_incumbent(t).index == 2);
  Trajectory infeasible;
  infeasible.evaluations.push_back({Vector{{0.0}}, -5.0, Vector{{0.5}}, 1});
  infeasible.evaluations.push_back({Vector{{1.0}}, 2.0, Vector{{0.1}}, 2});
  CHECK(final_incumbent(infeasible).index == 2);
}

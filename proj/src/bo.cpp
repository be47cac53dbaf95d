#include "sbopt/optimizers.hpp"
#include "sbopt/search.hpp"
#include "sbopt/surrogates.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

namespace sbopt {

double lcb(double mu, double sigma, double gamma) {
  if (sigma < 0.0)
    throw ConfigError("lcb: sigma must be >= 0");
  return mu - gamma * sigma;
}

Matrix acquisition_candidates(const Dataset& data, const Bounds& bounds, int pool_size, std::uint64_t seed) {
  const int n = bounds.dim();
  if (pool_size <= 0)
    pool_size = 100 * n;
  const int n_global = (pool_size + 1) / 2;
  const int n_local = pool_size - n_global;

  Eigen::Index best = 0;
  data.y().minCoeff(&best);
  const Vector incumbent = bounds.clip(data.X().row(best).transpose());

  Matrix pool = latin_hypercube(bounds, n_global, derive_seed(seed, "pool-lhs"));
  Rng rng(derive_seed(seed, "pool-local"));
  std::normal_distribution<double> normal(0.0, 1.0);
  const Vector sd = 0.1 * bounds.width();
  Matrix local(n_local, n);
  for (int r = 0; r < n_local; ++r) {
    Vector x = incumbent;
    for (int j = 0; j < n; ++j)
      x[j] += sd[j] * normal(rng);
    local.row(r) = bounds.clip(x).transpose();
  }
  search::append_rows(pool, local);
  search::append_row(pool, incumbent);
  return pool;
}

namespace {

GpFitOptions gp_options(const Bounds& bounds, const AcquisitionConfig& config, std::uint64_t seed) {
  GpFitOptions opts;
  opts.seed = seed;
  opts.length_scale_reference = bounds.width();
  if (config.fixed_noise_variance)
    opts.noise = NoiseMode::fixed(*config.fixed_noise_variance);
  return opts;
}

void check_inputs(const Dataset& data, const Bounds& bounds, const AcquisitionConfig& config) {
  if (data.size() < 2)
    throw ConfigError("Bayesian optimization needs at least 2 samples");
  if (data.dim() != bounds.dim())
    throw ConfigError("data and bounds dimensions differ");
  if (!(config.gamma >= 0.0))
    throw ConfigError("gamma must be >= 0");
}

Vector random_point(const Bounds& bounds, std::uint64_t seed) {
  Rng rng(derive_seed(seed, "random-fallback"));
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  Vector u(bounds.dim());
  for (Eigen::Index j = 0; j < u.size(); ++j)
    u[j] = unif(rng);
  return bounds.from_unit(u);
}

} // namespace

Vector propose_bo(const Dataset& data, const Bounds& bounds, const AcquisitionConfig& config, std::uint64_t seed) {
  check_inputs(data, bounds, config);
  GpModel gp;
  try {
    gp = fit_gp(data, gp_options(bounds, config, derive_seed(seed, "gp-objective")));
  } catch (const FitFailure& e) {
    log_warning(std::string("propose_bo: ") + e.what() + "; proposing a random point");
    return random_point(bounds, seed);
  }
  const Matrix pool = acquisition_candidates(data, bounds, config.candidate_pool, seed);
  const search::Region region(bounds);
  auto score = [&](const Vector& x) {
    const GpPrediction p = gp_posterior(gp, x);
    return lcb(p.mean, std::sqrt(p.variance), config.gamma);
  };
  return search::minimize(score, pool, region, config.refine_steps);
}

Vector propose_cbo(const Dataset& data, const Bounds& bounds, const AcquisitionConfig& config,
                   std::uint64_t seed) {
  check_inputs(data, bounds, config);
  if (data.n_constraints() < 1)
    throw ConfigError("propose_cbo needs constraint data");
  GpModel gp_f;
  std::vector<GpModel> gp_g;
  try {
    gp_f = fit_gp(data, gp_options(bounds, config, derive_seed(seed, "gp-objective")));
    for (int i = 0; i < data.n_constraints(); ++i)
      gp_g.push_back(fit_gp(data.X(), data.G().col(i),
                            gp_options(bounds, config, derive_seed(derive_seed(seed, "gp-constraint"), i))));
  } catch (const FitFailure& e) {
    log_warning(std::string("propose_cbo: ") + e.what() + "; proposing a random point");
    return random_point(bounds, seed);
  }
  const Matrix pool = acquisition_candidates(data, bounds, config.candidate_pool, seed);
  const search::Region region(bounds);
  // Predicted-feasible candidates first, ranked by LCB; otherwise least total violation.
  auto score = [&](const Vector& x) {
    double violation = 0.0;
    for (const GpModel& m : gp_g) {
      const GpPrediction p = gp_posterior(m, x);
      const double bound = config.constraint_backoff ? p.mean + std::sqrt(p.variance) : p.mean;
      violation += std::max(0.0, bound);
    }
    const GpPrediction p = gp_posterior(gp_f, x);
    return std::pair<double, double>(violation, lcb(p.mean, std::sqrt(p.variance), config.gamma));
  };
  return search::minimize(score, pool, region, config.refine_steps);
}

} // namespace sbopt

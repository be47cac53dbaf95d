#include "sbopt/optimizers.hpp"
#include "sbopt/surrogates.hpp"

#include <algorithm>
#include <cmath>

namespace sbopt {

double perturbation_probability(const DycorsState& state, int dim) {
  if (dim < 1)
    throw ConfigError("perturbation_probability: dim must be positive");
  const double base = std::min(20.0 / dim, 1.0);
  if (state.max_iterations <= 1)
    return base;
  const double decay = 1.0 - std::log(state.iteration + 1.0) / std::log(static_cast<double>(state.max_iterations));
  return std::clamp(base * decay, 0.0, 1.0);
}

double dycors_weight(const DycorsState& state) {
  constexpr int n = static_cast<int>(std::size(kDycorsWeights));
  return kDycorsWeights[((state.weight_cycle_index % n) + n) % n];
}

std::vector<double> min_max_scale(std::span<const double> values) {
  std::vector<double> out(values.size(), 0.0);
  if (values.empty())
    return out;
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  const double range = *hi - *lo;
  if (!(range > 0.0))
    return out;
  for (std::size_t i = 0; i < values.size(); ++i)
    out[i] = (values[i] - *lo) / range;
  return out;
}

std::vector<double> dycors_scores(std::span<const double> scaled_value, std::span<const double> scaled_distance,
                                  double weight) {
  if (scaled_value.size() != scaled_distance.size())
    throw ConfigError("dycors_scores: input lengths differ");
  std::vector<double> out(scaled_value.size());
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] = weight * scaled_value[i] + (1.0 - weight) * (1.0 - scaled_distance[i]);
  return out;
}

namespace {

// Perturbs a random subset of coordinates (never empty). Points leaving the
// box are reflected at the violated face, then clipped.
Matrix perturbed_trials(const Bounds& bounds, const Vector& incumbent, double p_select, double step_size, int n_trials,
                        Rng& rng) {
  const int n = bounds.dim();
  const Vector width = bounds.width();
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::uniform_int_distribution<int> pick(0, n - 1);
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix trials(n_trials, n);
  for (int t = 0; t < n_trials; ++t) {
    std::vector<bool> mask(static_cast<std::size_t>(n));
    bool any = false;
    for (int j = 0; j < n; ++j) {
      mask[static_cast<std::size_t>(j)] = unif(rng) < p_select;
      any = any || mask[static_cast<std::size_t>(j)];
    }
    if (!any)
      mask[static_cast<std::size_t>(pick(rng))] = true;
    Vector x = incumbent;
    for (int j = 0; j < n; ++j) {
      if (!mask[static_cast<std::size_t>(j)])
        continue;
      x[j] += step_size * width[j] * normal(rng);
      if (x[j] > bounds.upper()[j])
        x[j] = 2.0 * bounds.upper()[j] - x[j];
      if (x[j] < bounds.lower()[j])
        x[j] = 2.0 * bounds.lower()[j] - x[j];
    }
    trials.row(t) = bounds.clip(x).transpose();
  }
  return trials;
}

} // namespace

Vector dycors_step(const Dataset& data, const Bounds& bounds, const DycorsState& state, const Vector& incumbent,
                   std::uint64_t seed) {
  if (data.dim() != bounds.dim() || incumbent.size() != bounds.dim())
    throw ConfigError("dycors_step: dimension mismatch");
  if (!(state.step_size > 0.0))
    throw ConfigError("dycors_step: step size must be positive");
  const int n = bounds.dim();
  Rng rng(derive_seed(seed, "dycors-trials"));
  const double p = perturbation_probability(state, n);

  RbfModel rbf;
  try {
    rbf = fit_rbf(data);
  } catch (const Error& e) {
    log_warning(std::string("dycors_step: ") + e.what() + "; using a random perturbation");
    return perturbed_trials(bounds, incumbent, p, state.step_size, 1, rng).row(0).transpose();
  }

  const int n_trials = 100 * n;
  const Matrix trials = perturbed_trials(bounds, incumbent, p, state.step_size, n_trials, rng);
  std::vector<double> value(static_cast<std::size_t>(n_trials));
  std::vector<double> distance(static_cast<std::size_t>(n_trials));
  for (int t = 0; t < n_trials; ++t) {
    const Vector x = trials.row(t).transpose();
    value[static_cast<std::size_t>(t)] = rbf_predict(rbf, x);
    distance[static_cast<std::size_t>(t)] = (data.X().rowwise() - x.transpose()).rowwise().norm().minCoeff();
  }
  const std::vector<double> score =
      dycors_scores(min_max_scale(value), min_max_scale(distance), dycors_weight(state));
  const auto best = std::min_element(score.begin(), score.end()) - score.begin();
  return trials.row(best).transpose();
}

DycorsState dycors_update(DycorsState state, bool improved) {
  state.iteration = std::min(state.iteration + 1, state.max_iterations);
  state.weight_cycle_index = (state.weight_cycle_index + 1) % static_cast<int>(std::size(kDycorsWeights));
  if (improved) {
    ++state.success_count;
    state.fail_count = 0;
    if (state.success_count >= 3) {
      state.step_size = std::min(1.0, 2.0 * state.step_size);
      state.success_count = 0;
    }
  } else {
    ++state.fail_count;
    state.success_count = 0;
    if (state.fail_count >= 5) {
      state.step_size = std::max(1e-3 * state.initial_step_size, 0.5 * state.step_size);
      state.fail_count = 0;
    }
  }
  return state;
}

} // namespace sbopt

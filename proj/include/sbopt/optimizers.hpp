#ifndef SBOPT_OPTIMIZERS_HPP
#define SBOPT_OPTIMIZERS_HPP

#include "sbopt/core.hpp"

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace sbopt {

enum class Algorithm { bo, cbo, lsqm, cuatro, cobyla, cobyqa, dycors };

std::string_view to_string(Algorithm algorithm);
/// Accepts the lower-case tags above. Unknown tags raise ConfigError.
Algorithm parse_algorithm(std::string_view tag);
const std::vector<Algorithm>& all_algorithms();
bool handles_constraints(Algorithm algorithm);
/// n_x + 1 for the trust-region methods, max(5, 2 n_x) for BO/CBO/DYCORS.
int initial_design_size(Algorithm algorithm, int dim);

// ---------------------------------------------------------------------------
// Shared state and configuration
// ---------------------------------------------------------------------------

struct TrustRegionState {
  Vector center;
  double radius = 0.1;
  int success_count = 0;
  int fail_count = 0;
  double min_radius = 1e-6;
  double max_radius = 1.0;
};

/// Radius 10% of the mean domain width, min 1e-6 of it, max the full width.
TrustRegionState make_trust_region(const Bounds& bounds, Vector center);

struct AcquisitionConfig {
  double gamma = 2.0;
  int candidate_pool = 0; // 0: 100 * n_x
  int refine_steps = 20;
  // Require mu_g + sigma_g <= 0 instead of mu_g <= 0 in propose_cbo.
  bool constraint_backoff = false;
  // Observation noise fixed in the GP fit (standardized units); estimated when unset.
  std::optional<double> fixed_noise_variance;
};

struct MeritConfig {
  std::vector<double> penalties;
  double penalty_growth = 10.0;
  double penalty_cap = 1e8;

  static MeritConfig uniform(int n_constraints, double penalty = 100.0);
  double max_penalty() const;
};

/// f + sum_i rho_i [g_i]_+
double merit_sum(double f, const Vector& g, const MeritConfig& merit);
/// f + penalty * [max_i g_i]_+
double merit_max(double f, const Vector& g, double penalty);

/// Multiplies the penalty of every constraint above threshold by the growth
/// factor, capped.
MeritConfig grow_penalties(MeritConfig merit, const Vector& g, double threshold = 1e-3);

/// A trust-region step together with what the surrogate expects of it.
struct Proposal {
  Vector x;
  double predicted_reduction = 0.0;
  bool on_boundary = false;
  bool surrogate_feasible = true;
};

// ---------------------------------------------------------------------------
// Bayesian optimization
// ---------------------------------------------------------------------------

double lcb(double mu, double sigma, double gamma);

/// 50 n_x LHS points, 50 n_x Gaussian points around the incumbent, and the
/// incumbent itself (best observed y).
Matrix acquisition_candidates(const Dataset& data, const Bounds& bounds, int pool_size, std::uint64_t seed);

Vector propose_bo(const Dataset& data, const Bounds& bounds, const AcquisitionConfig& config, std::uint64_t seed);
Vector propose_cbo(const Dataset& data, const Bounds& bounds, const AcquisitionConfig& config,
                   std::uint64_t seed);

// ---------------------------------------------------------------------------
// Trust-region methods
// ---------------------------------------------------------------------------

Proposal lsqm_step(const Dataset& data, const Bounds& bounds, const TrustRegionState& tr, std::uint64_t seed = 0);
Proposal cuatro_step(const Dataset& data, const Bounds& bounds, const TrustRegionState& tr, const MeritConfig& merit,
                     std::uint64_t seed = 0);
Proposal cobyqa_step(const Dataset& data, const Bounds& bounds, const TrustRegionState& tr, const MeritConfig& merit,
                     std::uint64_t seed = 0);
/// `simplex` holds exactly the n_x + 1 interpolation points. Steps are
/// limited to radius / 2 around the center.
Proposal cobyla_step(const Dataset& simplex, const Bounds& bounds, const TrustRegionState& tr,
                     const MeritConfig& merit, std::uint64_t seed = 0);

/// Ratio test. `move_center` says whether the new point may replace the
/// center (feasibility requirement for constrained problems).
TrustRegionState trust_region_update(const TrustRegionState& tr, double predicted_reduction,
                                     double actual_reduction, bool step_on_boundary, const Vector& new_point,
                                     bool move_center = true);

/// Condition number of the edge matrix (rows x_i - x_0) exceeds max_condition.
bool simplex_degenerate(const Matrix& vertices, double max_condition = 1e8);
/// n_x + 1 vertices: the given vertex plus vertex + edge * e_i, flipped
/// inward where a vertex would leave the box.
Matrix regular_simplex(const Vector& vertex, double edge, const Bounds& bounds);

// ---------------------------------------------------------------------------
// DYCORS
// ---------------------------------------------------------------------------

struct DycorsState {
  int iteration = 0;
  int max_iterations = 1;
  double step_size = 0.2; // fraction of the domain width
  double initial_step_size = 0.2;
  int weight_cycle_index = 0;
  int success_count = 0;
  int fail_count = 0;
};

inline constexpr double kDycorsWeights[] = {0.3, 0.5, 0.8, 0.95};

double perturbation_probability(const DycorsState& state, int dim);
double dycors_weight(const DycorsState& state);
/// w * V_f + (1 - w) * (1 - V_d) on already scaled inputs.
std::vector<double> dycors_scores(std::span<const double> scaled_value, std::span<const double> scaled_distance,
                                  double weight);
/// Min-max scaling to [0, 1]; constant input maps to all zeros.
std::vector<double> min_max_scale(std::span<const double> values);

Vector dycors_step(const Dataset& data, const Bounds& bounds, const DycorsState& state, const Vector& incumbent,
                   std::uint64_t seed);
/// Advances the iteration and weight cycle and applies the step-size rule.
DycorsState dycors_update(DycorsState state, bool improved);

// ---------------------------------------------------------------------------
// Full runs
// ---------------------------------------------------------------------------

struct RunOptions {
  AcquisitionConfig acquisition;
  double initial_penalty = 100.0;
  double violation_threshold = 1e-3;
};

/// Initial LHS design, then propose -> clip -> evaluate -> update until exactly
/// `budget` evaluations. Optimizers work in the unit cube of the problem box;
/// the trajectory holds the original coordinates.
Trajectory run_optimizer(Algorithm algorithm, const Problem& problem, int budget, std::uint64_t seed,
                         const RunOptions& options = {});
Trajectory run_optimizer(std::string_view algorithm, const Problem& problem, int budget, std::uint64_t seed,
                         const RunOptions& options = {});

/// Best feasible evaluation (max g <= threshold), else the least violating one.
const Evaluation& final_incumbent(const Trajectory& trajectory, double threshold = 1e-3);

} // namespace sbopt

#endif // SBOPT_OPTIMIZERS_HPP

#ifndef SBOPT_CORE_HPP
#define SBOPT_CORE_HPP

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace sbopt {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Rng = std::mt19937_64;

class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Invalid configuration or precondition (bad bounds, budget too small, unknown key).
class ConfigError : public Error {
public:
  using Error::Error;
};

/// The evaluation budget is spent. Not a numerical failure.
class BudgetExhausted : public Error {
public:
  using Error::Error;
};

/// The black box returned a non-finite objective.
class EvaluationFailure : public Error {
public:
  using Error::Error;
};

/// A surrogate could not be fitted (singular system, Cholesky failure after max jitter).
class FitFailure : public Error {
public:
  using Error::Error;
};

/// Axis-aligned box. Construction validates lower < upper componentwise.
class Bounds {
public:
  Bounds(Vector lower, Vector upper);

  static Bounds uniform(int dim, double lower, double upper);
  static Bounds unit(int dim) { return uniform(dim, 0.0, 1.0); }

  int dim() const { return static_cast<int>(lower_.size()); }
  const Vector& lower() const { return lower_; }
  const Vector& upper() const { return upper_; }
  Vector width() const { return upper_ - lower_; }

  bool contains(const Vector& x, double tol = 0.0) const;
  Vector clip(const Vector& x) const;

  // Affine maps between the box and [0,1]^n.
  Vector to_unit(const Vector& x) const;
  Vector from_unit(const Vector& u) const;

private:
  Vector lower_;
  Vector upper_;
};

struct NoiseSpec {
  double sigma = 0.0;
  // Constraint observations stay exact unless this is set.
  bool noisy_constraints = false;
};

/// One black-box response: objective value and constraint values (g <= 0 is feasible).
struct Response {
  double f = 0.0;
  Vector g;
};

using BlackBox = std::function<Response(const Vector&)>;

struct KnownOptimum {
  Vector x;
  double value = 0.0;
};

/// A black-box problem over a box domain. Immutable after construction.
class Problem {
public:
  Problem(std::string name, Bounds bounds, int n_constraints, BlackBox function,
          NoiseSpec noise = {}, std::optional<KnownOptimum> known_optimum = std::nullopt);

  const std::string& name() const { return name_; }
  int dim() const { return bounds_.dim(); }
  const Bounds& bounds() const { return bounds_; }
  int n_constraints() const { return n_constraints_; }
  const NoiseSpec& noise() const { return noise_; }
  const std::optional<KnownOptimum>& known_optimum() const { return known_optimum_; }

  /// Noise-free response at x (no clipping, no budget).
  Response operator()(const Vector& x) const;

  Problem with_noise(NoiseSpec noise) const;

private:
  std::string name_;
  Bounds bounds_;
  int n_constraints_;
  BlackBox function_;
  NoiseSpec noise_;
  std::optional<KnownOptimum> known_optimum_;
};

struct Evaluation {
  Vector x;
  double y = 0.0;
  Vector g;
  int index = 0;

  /// max_i g_i, or -inf when unconstrained.
  double max_constraint() const;
  bool feasible(double threshold) const { return max_constraint() <= threshold; }
};

/// Sampled data, one row per sample.
class Dataset {
public:
  Dataset(int dim, int n_constraints);
  Dataset(Matrix X, Vector y, Matrix G = {});

  int size() const { return static_cast<int>(X_.rows()); }
  int dim() const { return static_cast<int>(X_.cols()); }
  int n_constraints() const { return static_cast<int>(G_.cols()); }

  const Matrix& X() const { return X_; }
  const Vector& y() const { return y_; }
  const Matrix& G() const { return G_; }

  void add(const Vector& x, double y, const Vector& g = Vector());

  /// Rows selected by index, in the given order.
  Dataset subset(std::span<const int> rows) const;

private:
  Matrix X_;
  Vector y_;
  Matrix G_;
};

struct Trajectory {
  std::vector<Evaluation> evaluations;
  int budget = 0;
  std::uint64_t seed = 0;
  // Fallback events (fit failures, switch to random search). Empty on a clean run.
  std::vector<std::string> notes;

  int size() const { return static_cast<int>(evaluations.size()); }
  std::vector<double> objective_values() const;
};

/// Deterministic sub-stream seed for a named consumer.
std::uint64_t derive_seed(std::uint64_t base, std::string_view tag);
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t value);

/// n points, one per equal-width stratum in every dimension.
Matrix latin_hypercube(const Bounds& bounds, int n, std::uint64_t seed);

/// Clips x into the bounds, evaluates, adds observation noise from noise_rng.
/// Throws EvaluationFailure if the objective is not finite.
Evaluation evaluate(const Problem& problem, const Vector& x, Rng& noise_rng, int index);

/// Budgeted evaluation with a dedicated noise stream.
class Evaluator {
public:
  Evaluator(const Problem& problem, int budget, std::uint64_t noise_seed);

  Evaluation operator()(const Vector& x);

  int used() const { return used_; }
  int remaining() const { return budget_ - used_; }
  int budget() const { return budget_; }

private:
  const Problem& problem_;
  int budget_;
  int used_ = 0;
  Rng noise_rng_;
};

/// Running minimum of y. Throws ConfigError on empty input.
std::vector<double> best_so_far(std::span<const double> y);
std::vector<double> best_so_far(const Trajectory& trajectory);

/// Warnings go to stderr when SBOPT_LOG is set to anything but "0"/"off".
void log_warning(const std::string& message);

} // namespace sbopt

#endif // SBOPT_CORE_HPP

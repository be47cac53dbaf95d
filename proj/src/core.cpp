#include "sbopt/core.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <iostream>
#include <limits>
#include <numeric>

namespace sbopt {

Bounds::Bounds(Vector lower, Vector upper) : lower_(std::move(lower)), upper_(std::move(upper)) {
  if (lower_.size() != upper_.size())
    throw ConfigError("bounds: lower and upper have different lengths");
  if (lower_.size() == 0)
    throw ConfigError("bounds: empty");
  for (Eigen::Index i = 0; i < lower_.size(); ++i) {
    if (!std::isfinite(lower_[i]) || !std::isfinite(upper_[i]) || !(lower_[i] < upper_[i]))
      throw ConfigError("bounds: degenerate interval in dimension " + std::to_string(i));
  }
}

Bounds Bounds::uniform(int dim, double lower, double upper) {
  if (dim < 1)
    throw ConfigError("bounds: dimension must be positive");
  return Bounds(Vector::Constant(dim, lower), Vector::Constant(dim, upper));
}

bool Bounds::contains(const Vector& x, double tol) const {
  if (x.size() != lower_.size())
    return false;
  for (Eigen::Index i = 0; i < x.size(); ++i)
    if (x[i] < lower_[i] - tol || x[i] > upper_[i] + tol)
      return false;
  return true;
}

Vector Bounds::clip(const Vector& x) const { return x.cwiseMax(lower_).cwiseMin(upper_); }

Vector Bounds::to_unit(const Vector& x) const {
  return (x - lower_).cwiseQuotient(upper_ - lower_);
}

Vector Bounds::from_unit(const Vector& u) const {
  return lower_ + u.cwiseProduct(upper_ - lower_);
}

Problem::Problem(std::string name, Bounds bounds, int n_constraints, BlackBox function,
                 NoiseSpec noise, std::optional<KnownOptimum> known_optimum)
    : name_(std::move(name)), bounds_(std::move(bounds)), n_constraints_(n_constraints),
      function_(std::move(function)), noise_(noise), known_optimum_(std::move(known_optimum)) {
  if (n_constraints_ < 0)
    throw ConfigError("problem " + name_ + ": negative constraint count");
  if (!(noise_.sigma >= 0.0))
    throw ConfigError("problem " + name_ + ": noise sigma must be >= 0");
  if (!function_)
    throw ConfigError("problem " + name_ + ": missing black-box function");
  if (known_optimum_ && !bounds_.contains(known_optimum_->x, 1e-12))
    throw ConfigError("problem " + name_ + ": known optimum outside bounds");
}

Response Problem::operator()(const Vector& x) const {
  Response r = function_(x);
  if (r.g.size() != n_constraints_)
    throw EvaluationFailure("problem " + name_ + ": constraint vector has wrong length");
  return r;
}

Problem Problem::with_noise(NoiseSpec noise) const {
  return Problem(name_, bounds_, n_constraints_, function_, noise, known_optimum_);
}

double Evaluation::max_constraint() const {
  if (g.size() == 0)
    return -std::numeric_limits<double>::infinity();
  return g.maxCoeff();
}

Dataset::Dataset(int dim, int n_constraints) : X_(0, dim), y_(0), G_(0, n_constraints) {}

Dataset::Dataset(Matrix X, Vector y, Matrix G) : X_(std::move(X)), y_(std::move(y)), G_(std::move(G)) {
  if (X_.rows() != y_.size())
    throw ConfigError("dataset: X rows and y length differ");
  if (G_.size() == 0)
    G_.resize(X_.rows(), 0);
  if (G_.rows() != X_.rows())
    throw ConfigError("dataset: G rows and X rows differ");
}

void Dataset::add(const Vector& x, double y, const Vector& g) {
  if (x.size() != X_.cols())
    throw ConfigError("dataset: point has wrong dimension");
  if (g.size() != G_.cols())
    throw ConfigError("dataset: constraint vector has wrong length");
  const Eigen::Index n = X_.rows();
  X_.conservativeResize(n + 1, Eigen::NoChange);
  X_.row(n) = x.transpose();
  y_.conservativeResize(n + 1);
  y_[n] = y;
  G_.conservativeResize(n + 1, Eigen::NoChange);
  if (G_.cols() > 0)
    G_.row(n) = g.transpose();
}

Dataset Dataset::subset(std::span<const int> rows) const {
  Matrix X(rows.size(), X_.cols());
  Vector y(rows.size());
  Matrix G(rows.size(), G_.cols());
  for (std::size_t k = 0; k < rows.size(); ++k) {
    X.row(k) = X_.row(rows[k]);
    y[k] = y_[rows[k]];
    if (G_.cols() > 0)
      G.row(k) = G_.row(rows[k]);
  }
  return Dataset(std::move(X), std::move(y), std::move(G));
}

std::vector<double> Trajectory::objective_values() const {
  std::vector<double> y;
  y.reserve(evaluations.size());
  for (const auto& e : evaluations)
    y.push_back(e.y);
  return y;
}

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

} // namespace

std::uint64_t derive_seed(std::uint64_t base, std::string_view tag) {
  // FNV-1a over the tag, mixed with the base seed.
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : tag) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return splitmix64(splitmix64(base) ^ h);
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t value) {
  return splitmix64(splitmix64(base) ^ splitmix64(value + 0x51ed270b27b2c5a3ULL));
}

Matrix latin_hypercube(const Bounds& bounds, int n, std::uint64_t seed) {
  if (n < 1)
    throw ConfigError("latin_hypercube: n must be >= 1");
  const int d = bounds.dim();
  Rng rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  Matrix points(n, d);
  std::vector<int> strata(n);
  for (int j = 0; j < d; ++j) {
    std::iota(strata.begin(), strata.end(), 0);
    std::shuffle(strata.begin(), strata.end(), rng);
    const double lo = bounds.lower()[j];
    const double w = bounds.upper()[j] - lo;
    for (int i = 0; i < n; ++i) {
      double u = (strata[i] + unif(rng)) / n;
      double v = lo + u * w;
      // Keep v strictly inside its stratum despite rounding.
      const double stratum_hi = lo + w * (strata[i] + 1) / n;
      if (v >= stratum_hi)
        v = std::nextafter(stratum_hi, lo);
      points(i, j) = v;
    }
  }
  return points;
}

Evaluation evaluate(const Problem& problem, const Vector& x, Rng& noise_rng, int index) {
  Evaluation e;
  e.x = problem.bounds().clip(x);
  e.index = index;
  Response r = problem(e.x);
  if (!std::isfinite(r.f))
    throw EvaluationFailure("problem " + problem.name() + ": non-finite objective");
  const NoiseSpec& noise = problem.noise();
  if (noise.sigma > 0.0) {
    std::normal_distribution<double> eps(0.0, noise.sigma);
    r.f += eps(noise_rng);
    if (noise.noisy_constraints)
      for (Eigen::Index i = 0; i < r.g.size(); ++i)
        r.g[i] += eps(noise_rng);
  }
  e.y = r.f;
  e.g = std::move(r.g);
  return e;
}

Evaluator::Evaluator(const Problem& problem, int budget, std::uint64_t noise_seed)
    : problem_(problem), budget_(budget), noise_rng_(noise_seed) {
  if (budget < 0)
    throw ConfigError("evaluator: negative budget");
}

Evaluation Evaluator::operator()(const Vector& x) {
  if (used_ >= budget_)
    throw BudgetExhausted("evaluation budget of " + std::to_string(budget_) + " exhausted");
  Evaluation e = evaluate(problem_, x, noise_rng_, used_ + 1);
  ++used_;
  return e;
}

std::vector<double> best_so_far(std::span<const double> y) {
  if (y.empty())
    throw ConfigError("best_so_far: empty trajectory");
  std::vector<double> out(y.size());
  double best = y[0];
  for (std::size_t k = 0; k < y.size(); ++k) {
    best = std::min(best, y[k]);
    out[k] = best;
  }
  return out;
}

std::vector<double> best_so_far(const Trajectory& trajectory) {
  const auto y = trajectory.objective_values();
  return best_so_far(std::span<const double>(y));
}

void log_warning(const std::string& message) {
  static const bool enabled = [] {
    const char* v = std::getenv("SBOPT_LOG");
    if (v == nullptr)
      return false;
    std::string s(v);
    return !(s.empty() || s == "0" || s == "off");
  }();
  if (enabled)
    std::cerr << "sbopt: " << message << '\n';
}

} // namespace sbopt

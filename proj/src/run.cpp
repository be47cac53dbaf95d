#include "sbopt/optimizers.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <deque>
#include <limits>
#include <memory>
#include <sstream>

namespace sbopt {

namespace {

constexpr std::array<std::pair<Algorithm, std::string_view>, 7> kTags{{
    {Algorithm::bo, "bo"},
    {Algorithm::cbo, "cbo"},
    {Algorithm::lsqm, "lsqm"},
    {Algorithm::cuatro, "cuatro"},
    {Algorithm::cobyla, "cobyla"},
    {Algorithm::cobyqa, "cobyqa"},
    {Algorithm::dycors, "dycors"},
}};

} // namespace

std::string_view to_string(Algorithm algorithm) {
  for (const auto& [a, tag] : kTags)
    if (a == algorithm)
      return tag;
  return "unknown";
}

Algorithm parse_algorithm(std::string_view tag) {
  for (const auto& [a, t] : kTags)
    if (t == tag)
      return a;
  std::ostringstream msg;
  msg << "unknown algorithm '" << tag << "'; expected one of:";
  for (const auto& [a, t] : kTags)
    msg << ' ' << t;
  throw ConfigError(msg.str());
}

const std::vector<Algorithm>& all_algorithms() {
  static const std::vector<Algorithm> all = [] {
    std::vector<Algorithm> v;
    for (const auto& [a, t] : kTags)
      v.push_back(a);
    return v;
  }();
  return all;
}

bool handles_constraints(Algorithm algorithm) {
  switch (algorithm) {
  case Algorithm::cbo:
  case Algorithm::cuatro:
  case Algorithm::cobyla:
  case Algorithm::cobyqa:
    return true;
  default:
    return false;
  }
}

int initial_design_size(Algorithm algorithm, int dim) {
  switch (algorithm) {
  case Algorithm::bo:
  case Algorithm::cbo:
  case Algorithm::dycors:
    return std::max(5, 2 * dim);
  default:
    return dim + 1;
  }
}

const Evaluation& final_incumbent(const Trajectory& trajectory, double threshold) {
  if (trajectory.evaluations.empty())
    throw ConfigError("final_incumbent: empty trajectory");
  const Evaluation* best_feasible = nullptr;
  const Evaluation* least_violating = &trajectory.evaluations.front();
  for (const Evaluation& e : trajectory.evaluations) {
    if (e.feasible(threshold) && (!best_feasible || e.y < best_feasible->y))
      best_feasible = &e;
    if (e.max_constraint() < least_violating->max_constraint())
      least_violating = &e;
  }
  return best_feasible ? *best_feasible : *least_violating;
}

namespace {

// Run state shared by the strategies. Data are held in unit-cube coordinates.
class RunContext {
public:
  RunContext(const Problem& problem, int budget, std::uint64_t seed, const RunOptions& options)
      : problem_(problem), unit_(Bounds::unit(problem.dim())), options_(options),
        evaluator_(problem, budget, derive_seed(seed, "noise")), data_(problem.dim(), problem.n_constraints()) {
    trajectory_.budget = budget;
    trajectory_.seed = seed;
  }

  int evaluate(const Vector& u) {
    const Vector x = problem_.bounds().from_unit(unit_.clip(u));
    Evaluation e = evaluator_(x);
    data_.add(unit_.clip(problem_.bounds().to_unit(e.x)), e.y, e.g);
    trajectory_.evaluations.push_back(std::move(e));
    return data_.size() - 1;
  }

  const Bounds& unit() const { return unit_; }
  const Dataset& data() const { return data_; }
  const RunOptions& options() const { return options_; }
  int remaining() const { return evaluator_.remaining(); }
  int budget() const { return evaluator_.budget(); }
  Trajectory& trajectory() { return trajectory_; }

  Vector x(int i) const { return data_.X().row(i).transpose(); }
  double y(int i) const { return data_.y()[i]; }
  Vector g(int i) const { return data_.n_constraints() ? Vector(data_.G().row(i).transpose()) : Vector(); }
  double max_g(int i) const { return data_.n_constraints() ? data_.G().row(i).maxCoeff() : -std::numeric_limits<double>::infinity(); }
  bool feasible(int i) const { return max_g(i) <= options_.violation_threshold; }

  double min_distance(const Vector& u) const { return (data_.X().rowwise() - u.transpose()).rowwise().norm().minCoeff(); }

  /// Best feasible sample by objective, else the least violating one.
  int incumbent(bool use_constraints) const {
    int best = 0;
    for (int i = 1; i < data_.size(); ++i) {
      if (!use_constraints || data_.n_constraints() == 0) {
        if (y(i) < y(best))
          best = i;
        continue;
      }
      const bool fi = feasible(i);
      const bool fb = feasible(best);
      if (fi != fb) {
        if (fi)
          best = i;
      } else if (fi ? y(i) < y(best) : max_g(i) < max_g(best)) {
        best = i;
      }
    }
    return best;
  }

private:
  const Problem& problem_;
  Bounds unit_;
  RunOptions options_;
  Evaluator evaluator_;
  Dataset data_;
  Trajectory trajectory_;
};

class Strategy {
public:
  virtual ~Strategy() = default;
  virtual void start(const RunContext& ctx) = 0;
  virtual Vector propose(const RunContext& ctx, std::uint64_t seed) = 0;
  virtual void observe(const RunContext& ctx, int index) = 0;
};

class BoStrategy final : public Strategy {
public:
  explicit BoStrategy(bool constrained) : constrained_(constrained) {}
  void start(const RunContext&) override {}
  Vector propose(const RunContext& ctx, std::uint64_t seed) override {
    if (constrained_ && ctx.data().n_constraints() > 0)
      return propose_cbo(ctx.data(), ctx.unit(), ctx.options().acquisition, seed);
    return propose_bo(ctx.data(), ctx.unit(), ctx.options().acquisition, seed);
  }
  void observe(const RunContext&, int) override {}

private:
  bool constrained_;
};

class DycorsStrategy final : public Strategy {
public:
  void start(const RunContext& ctx) override {
    state_.max_iterations = std::max(1, ctx.remaining());
    best_ = ctx.data().y().minCoeff();
  }
  Vector propose(const RunContext& ctx, std::uint64_t seed) override {
    return dycors_step(ctx.data(), ctx.unit(), state_, ctx.x(ctx.incumbent(false)), seed);
  }
  void observe(const RunContext& ctx, int index) override {
    const double y = ctx.y(index);
    const bool improved = y < best_ - 1e-3 * std::abs(best_);
    best_ = std::min(best_, y);
    state_ = dycors_update(state_, improved);
  }

private:
  DycorsState state_;
  double best_ = 0.0;
};

// Point at distance `radius` from the center that is farthest from the data.
Vector geometry_point(const RunContext& ctx, const Vector& center, double radius, std::uint64_t seed) {
  const int n = ctx.unit().dim();
  Rng rng(derive_seed(seed, "geometry"));
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector best = center;
  double best_d = -1.0;
  for (int t = 0; t < 20 * n; ++t) {
    Vector dir(n);
    for (int j = 0; j < n; ++j)
      dir[j] = normal(rng);
    if (dir.norm() == 0.0)
      continue;
    const Vector x = ctx.unit().clip(center + radius * dir / dir.norm());
    const double d = ctx.min_distance(x);
    if (d > best_d) {
      best_d = d;
      best = x;
    }
  }
  return best;
}

class QuadTrStrategy final : public Strategy {
public:
  explicit QuadTrStrategy(Algorithm algorithm) : algorithm_(algorithm) {}

  void start(const RunContext& ctx) override {
    merit_ = MeritConfig::uniform(ctx.data().n_constraints(), ctx.options().initial_penalty);
    center_ = ctx.incumbent(uses_constraints());
    tr_ = make_trust_region(ctx.unit(), ctx.x(center_));
  }

  Vector propose(const RunContext& ctx, std::uint64_t seed) override {
    geometry_ = false;
    try {
      switch (algorithm_) {
      case Algorithm::lsqm:
        pending_ = lsqm_step(ctx.data(), ctx.unit(), tr_, seed);
        break;
      case Algorithm::cuatro:
        pending_ = cuatro_step(ctx.data(), ctx.unit(), tr_, merit_, seed);
        break;
      default:
        pending_ = cobyqa_step(ctx.data(), ctx.unit(), tr_, merit_, seed);
        break;
      }
    } catch (const FitFailure& e) {
      log_warning(std::string(to_string(algorithm_)) + ": " + e.what() + "; shrinking radius");
      tr_.radius = std::max(tr_.min_radius, 0.5 * tr_.radius);
      geometry_ = true;
    }
    if (geometry_ || !pending_.x.allFinite() || ctx.min_distance(pending_.x) < 1e-3 * tr_.radius) {
      geometry_ = true;
      pending_ = Proposal{geometry_point(ctx, tr_.center, tr_.radius, seed), 0.0, false, true};
    }
    return pending_.x;
  }

  void observe(const RunContext& ctx, int index) override {
    const double actual = merit(ctx, center_) - merit(ctx, index);
    const bool move = !uses_constraints() || ctx.feasible(index) || !ctx.feasible(center_);
    if (geometry_) {
      if (!(actual > 0.0 && move))
        tr_.radius = std::max(tr_.min_radius, 0.5 * tr_.radius);
      else
        tr_.center = ctx.x(index);
    } else {
      tr_ = trust_region_update(tr_, pending_.predicted_reduction, actual, pending_.on_boundary, ctx.x(index), move);
    }
    if (actual > 0.0 && move)
      center_ = index;
    if (uses_constraints())
      merit_ = grow_penalties(merit_, ctx.g(index), ctx.options().violation_threshold);
  }

private:
  bool uses_constraints() const { return algorithm_ != Algorithm::lsqm; }
  double merit(const RunContext& ctx, int i) const {
    return uses_constraints() ? merit_sum(ctx.y(i), ctx.g(i), merit_) : ctx.y(i);
  }

  Algorithm algorithm_;
  TrustRegionState tr_;
  MeritConfig merit_;
  int center_ = 0;
  Proposal pending_;
  bool geometry_ = false;
};

class CobylaStrategy final : public Strategy {
public:
  void start(const RunContext& ctx) override {
    merit_ = MeritConfig::uniform(ctx.data().n_constraints(), ctx.options().initial_penalty);
    simplex_.clear();
    for (int i = 0; i < ctx.data().size(); ++i)
      simplex_.push_back(i);
    center_ = simplex_.front();
    for (int i : simplex_)
      if (merit(ctx, i) < merit(ctx, center_))
        center_ = i;
    tr_ = make_trust_region(ctx.unit(), ctx.x(center_));
  }

  Vector propose(const RunContext& ctx, std::uint64_t seed) override {
    mode_ = Mode::model;
    if (queue_.empty() && simplex_.size() == static_cast<std::size_t>(ctx.unit().dim() + 1) &&
        simplex_degenerate(ctx.data().subset(simplex_).X())) {
      const Matrix V = regular_simplex(tr_.center, tr_.radius, ctx.unit());
      for (Eigen::Index r = 1; r < V.rows(); ++r)
        queue_.push_back(V.row(r).transpose());
      simplex_ = {center_};
    }
    if (!queue_.empty()) {
      mode_ = Mode::rebuild;
      Vector x = queue_.front();
      queue_.pop_front();
      return x;
    }
    pending_ = cobyla_step(ctx.data().subset(simplex_), ctx.unit(), tr_, merit_, seed);
    if (!pending_.x.allFinite() || ctx.min_distance(pending_.x) < 5e-4 * tr_.radius) {
      mode_ = Mode::geometry;
      pending_.x = geometry_point(ctx, tr_.center, 0.5 * tr_.radius, seed);
    }
    return pending_.x;
  }

  void observe(const RunContext& ctx, int index) override {
    const double actual = merit(ctx, center_) - merit(ctx, index);
    const bool move = ctx.feasible(index) || !ctx.feasible(center_);
    switch (mode_) {
    case Mode::rebuild:
      simplex_.push_back(index);
      if (actual > 0.0 && move)
        tr_.center = ctx.x(index);
      break;
    case Mode::geometry:
      if (actual > 0.0 && move)
        tr_.center = ctx.x(index);
      else
        tr_.radius = std::max(tr_.min_radius, 0.5 * tr_.radius);
      replace_worst(ctx, index);
      break;
    case Mode::model:
      tr_ = trust_region_update(tr_, pending_.predicted_reduction, actual, pending_.on_boundary, ctx.x(index), move);
      replace_worst(ctx, index);
      break;
    }
    if (actual > 0.0 && move)
      center_ = index;
    merit_ = grow_penalties(merit_, ctx.g(index), ctx.options().violation_threshold);
  }

private:
  enum class Mode { model, geometry, rebuild };

  double merit(const RunContext& ctx, int i) const { return merit_max(ctx.y(i), ctx.g(i), merit_.max_penalty()); }

  // Drops the highest-merit vertex other than the center.
  void replace_worst(const RunContext& ctx, int index) {
    int worst = -1;
    for (std::size_t k = 0; k < simplex_.size(); ++k) {
      if (simplex_[k] == center_)
        continue;
      if (worst < 0 || merit(ctx, simplex_[k]) > merit(ctx, simplex_[static_cast<std::size_t>(worst)]))
        worst = static_cast<int>(k);
    }
    if (worst >= 0)
      simplex_[static_cast<std::size_t>(worst)] = index;
    else
      simplex_.push_back(index);
  }

  TrustRegionState tr_;
  MeritConfig merit_;
  std::vector<int> simplex_;
  std::deque<Vector> queue_;
  int center_ = 0;
  Proposal pending_;
  Mode mode_ = Mode::model;
};

std::unique_ptr<Strategy> make_strategy(Algorithm algorithm) {
  switch (algorithm) {
  case Algorithm::bo:
    return std::make_unique<BoStrategy>(false);
  case Algorithm::cbo:
    return std::make_unique<BoStrategy>(true);
  case Algorithm::dycors:
    return std::make_unique<DycorsStrategy>();
  case Algorithm::cobyla:
    return std::make_unique<CobylaStrategy>();
  default:
    return std::make_unique<QuadTrStrategy>(algorithm);
  }
}

} // namespace

Trajectory run_optimizer(Algorithm algorithm, const Problem& problem, int budget, std::uint64_t seed,
                         const RunOptions& options) {
  const int n_init = initial_design_size(algorithm, problem.dim());
  if (budget < n_init) {
    std::ostringstream msg;
    msg << to_string(algorithm) << ": budget " << budget << " is below the initial design size " << n_init;
    throw ConfigError(msg.str());
  }
  RunContext ctx(problem, budget, seed, options);
  auto strategy = make_strategy(algorithm);
  const std::uint64_t propose_seed = derive_seed(seed, "propose");
  Rng fallback_rng(derive_seed(seed, "random-search"));
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  bool fallback = false;

  auto switch_to_random = [&](const std::string& what) {
    fallback = true;
    const std::string note = std::string(to_string(algorithm)) + ": " + what + "; remaining budget spent on random search";
    ctx.trajectory().notes.push_back(note);
    log_warning(note);
  };

  try {
    const Matrix design = latin_hypercube(ctx.unit(), n_init, derive_seed(seed, "initial-design"));
    for (Eigen::Index r = 0; r < design.rows(); ++r)
      ctx.evaluate(design.row(r).transpose());
    try {
      strategy->start(ctx);
    } catch (const Error& e) {
      switch_to_random(e.what());
    }
    for (std::uint64_t it = 0; ctx.remaining() > 0; ++it) {
      Vector u;
      if (!fallback) {
        try {
          u = strategy->propose(ctx, derive_seed(propose_seed, it));
          if (!u.allFinite())
            throw FitFailure("non-finite proposal");
        } catch (const Error& e) {
          switch_to_random(e.what());
        }
      }
      if (fallback) {
        u.resize(problem.dim());
        for (Eigen::Index j = 0; j < u.size(); ++j)
          u[j] = unif(fallback_rng);
      }
      const int index = ctx.evaluate(u);
      if (!fallback) {
        try {
          strategy->observe(ctx, index);
        } catch (const Error& e) {
          switch_to_random(e.what());
        }
      }
    }
  } catch (const EvaluationFailure& e) {
    const std::string note = std::string(to_string(algorithm)) + ": run stopped, " + e.what();
    ctx.trajectory().notes.push_back(note);
    log_warning(note);
  }
  return std::move(ctx.trajectory());
}

Trajectory run_optimizer(std::string_view algorithm, const Problem& problem, int budget, std::uint64_t seed,
                         const RunOptions& options) {
  return run_optimizer(parse_algorithm(algorithm), problem, budget, seed, options);
}

} // namespace sbopt

#include "sbopt/optimizers.hpp"
#include "sbopt/search.hpp"
#include "sbopt/surrogates.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <utility>

namespace sbopt {

TrustRegionState make_trust_region(const Bounds& bounds, Vector center) {
  if (center.size() != bounds.dim())
    throw ConfigError("trust region center has wrong dimension");
  const double w = bounds.width().mean();
  TrustRegionState tr;
  tr.center = bounds.clip(center);
  tr.radius = 0.1 * w;
  tr.min_radius = 1e-6 * w;
  tr.max_radius = w;
  return tr;
}

MeritConfig MeritConfig::uniform(int n_constraints, double penalty) {
  if (!(penalty > 0.0))
    throw ConfigError("penalty must be positive");
  MeritConfig m;
  m.penalties.assign(static_cast<std::size_t>(std::max(0, n_constraints)), penalty);
  return m;
}

double MeritConfig::max_penalty() const {
  return penalties.empty() ? 1.0 : *std::max_element(penalties.begin(), penalties.end());
}

double merit_sum(double f, const Vector& g, const MeritConfig& merit) {
  if (static_cast<std::size_t>(g.size()) != merit.penalties.size())
    throw ConfigError("merit_sum: one penalty per constraint required");
  double s = f;
  for (Eigen::Index i = 0; i < g.size(); ++i)
    s += merit.penalties[static_cast<std::size_t>(i)] * std::max(0.0, g[i]);
  return s;
}

double merit_max(double f, const Vector& g, double penalty) {
  if (g.size() == 0)
    return f;
  return f + penalty * std::max(0.0, g.maxCoeff());
}

MeritConfig grow_penalties(MeritConfig merit, const Vector& g, double threshold) {
  if (!(merit.penalty_growth > 1.0))
    throw ConfigError("penalty_growth must exceed 1");
  for (Eigen::Index i = 0; i < g.size() && static_cast<std::size_t>(i) < merit.penalties.size(); ++i)
    if (g[i] > threshold)
      merit.penalties[static_cast<std::size_t>(i)] =
          std::min(merit.penalty_cap, merit.penalties[static_cast<std::size_t>(i)] * merit.penalty_growth);
  return merit;
}

TrustRegionState trust_region_update(const TrustRegionState& tr, double predicted_reduction,
                                     double actual_reduction, bool step_on_boundary, const Vector& new_point,
                                     bool move_center) {
  TrustRegionState out = tr;
  const double ratio =
      predicted_reduction > 0.0 ? actual_reduction / predicted_reduction : -std::numeric_limits<double>::infinity();
  if (ratio < 0.25 || actual_reduction <= 0.0) {
    out.radius = std::max(out.min_radius, 0.5 * out.radius);
    ++out.fail_count;
    out.success_count = 0;
  } else {
    if (ratio >= 0.75 && step_on_boundary)
      out.radius = std::min(out.max_radius, 2.0 * out.radius);
    ++out.success_count;
    out.fail_count = 0;
  }
  if (actual_reduction > 0.0 && move_center)
    out.center = new_point;
  return out;
}

namespace {

constexpr double kModelFeasibilityTol = 1e-6;
constexpr int kRefineSteps = 20;

void check_tr_inputs(const Dataset& data, const Bounds& bounds, const TrustRegionState& tr) {
  if (data.dim() != bounds.dim() || tr.center.size() != bounds.dim())
    throw ConfigError("trust-region step: dimension mismatch");
  if (data.size() < data.dim() + 1)
    throw ConfigError("trust-region step needs at least n_x + 1 samples");
  if (!(tr.radius > 0.0))
    throw ConfigError("trust-region radius must be positive");
}

bool on_boundary(const Vector& x, const Vector& center, double radius) {
  return (x - center).norm() >= (1.0 - 1e-3) * radius;
}

Matrix tr_pool(const search::Region& region, std::uint64_t seed) {
  Matrix pool = region.sample(100 * region.box().dim(), derive_seed(seed, "tr-pool"));
  search::append_row(pool, region.center());
  return pool;
}

QuadModel combine(const QuadModel& a, const QuadModel& b, double weight) {
  return {a.Q + weight * b.Q, a.c + weight * b.c, a.b + weight * b.b};
}

// Exact minimizer of a quadratic model over the ball (box ignored).
Vector quad_ball_min(const QuadModel& q, const Vector& center, double radius) {
  return center + search::solve_trust_region_subproblem(2.0 * q.Q, q.gradient(center), radius);
}

// Minimizer of f on the linearization of c = 0, iterated from x.
Vector quad_on_constraint(const QuadModel& f, const QuadModel& c, Vector x) {
  const Eigen::Index n = x.size();
  for (int it = 0; it < 4; ++it) {
    const Vector a = c.gradient(x);
    if (a.norm() == 0.0)
      break;
    Matrix K = Matrix::Zero(n + 1, n + 1);
    K.topLeftCorner(n, n) = 2.0 * f.Q;
    K.topRightCorner(n, 1) = a;
    K.bottomLeftCorner(1, n) = a.transpose();
    Vector rhs(n + 1);
    rhs.head(n) = -f.c;
    rhs[n] = a.dot(x) - c(x);
    const Vector sol = Eigen::CompleteOrthogonalDecomposition<Matrix>(K).solve(rhs);
    if (!sol.allFinite())
      break;
    x = sol.head(n);
  }
  return x;
}

struct QuadSurrogates {
  QuadModel f;
  std::vector<QuadModel> g;
};

double model_violation(const QuadSurrogates& s, const Vector& x) {
  double v = 0.0;
  for (const QuadModel& c : s.g)
    v += std::max(0.0, c(x) - kModelFeasibilityTol);
  return v;
}

double model_merit(const QuadSurrogates& s, const Vector& x, const MeritConfig& merit) {
  double v = s.f(x);
  for (std::size_t i = 0; i < s.g.size(); ++i)
    v += merit.penalties[i] * std::max(0.0, s.g[i](x));
  return v;
}

// Analytic starting points for the constrained quadratic subproblem.
void add_constrained_candidates(Matrix& pool, const QuadSurrogates& s, const MeritConfig& merit,
                                const search::Region& region) {
  const Vector& center = region.center();
  const double r = region.radius();
  const Vector x_free = quad_ball_min(s.f, center, r);
  search::append_row(pool, x_free);
  for (std::size_t i = 0; i < s.g.size(); ++i) {
    search::append_row(pool, quad_ball_min(s.g[i], center, r));
    search::append_row(pool, quad_ball_min(combine(s.f, s.g[i], merit.penalties[i]), center, r));
    search::append_row(pool, quad_on_constraint(s.f, s.g[i], x_free));
  }
}

Proposal finish(const Vector& x, const Vector& center, double radius, double predicted, bool feasible) {
  Proposal p;
  p.x = x;
  p.predicted_reduction = predicted;
  p.on_boundary = on_boundary(x, center, radius);
  p.surrogate_feasible = feasible;
  return p;
}

void check_merit(const Dataset& data, const MeritConfig& merit) {
  if (merit.penalties.size() != static_cast<std::size_t>(data.n_constraints()))
    throw ConfigError("merit config needs one penalty per constraint");
  for (double p : merit.penalties)
    if (!(p > 0.0))
      throw ConfigError("penalties must be positive");
}

} // namespace

Proposal lsqm_step(const Dataset& data, const Bounds& bounds, const TrustRegionState& tr, std::uint64_t seed) {
  check_tr_inputs(data, bounds, tr);
  const QuadModel q = fit_quadratic(data.X(), data.y(), 1e-8, true);
  const search::Region region(bounds, tr.center, tr.radius);
  Matrix pool = tr_pool(region, seed);
  search::append_row(pool, quad_ball_min(q, tr.center, tr.radius));
  const Vector x = search::minimize([&](const Vector& v) { return q(v); }, pool, region, kRefineSteps);
  return finish(x, tr.center, tr.radius, q(tr.center) - q(x), true);
}

Proposal cuatro_step(const Dataset& data, const Bounds& bounds, const TrustRegionState& tr, const MeritConfig& merit,
                     std::uint64_t seed) {
  check_tr_inputs(data, bounds, tr);
  check_merit(data, merit);
  QuadSurrogates s;
  s.f = fit_quadratic(data.X(), data.y(), 1e-8, true);
  for (int i = 0; i < data.n_constraints(); ++i)
    s.g.push_back(fit_quadratic(data.X(), data.G().col(i), 1e-8, true));
  const search::Region region(bounds, tr.center, tr.radius);
  Matrix pool = tr_pool(region, seed);
  add_constrained_candidates(pool, s, merit, region);
  auto score = [&](const Vector& v) { return std::pair<double, double>(model_violation(s, v), s.f(v)); };
  const Vector x = search::minimize(score, pool, region, kRefineSteps);
  return finish(x, tr.center, tr.radius, model_merit(s, tr.center, merit) - model_merit(s, x, merit),
                model_violation(s, x) == 0.0);
}

Proposal cobyqa_step(const Dataset& data, const Bounds& bounds, const TrustRegionState& tr, const MeritConfig& merit,
                     std::uint64_t seed) {
  check_tr_inputs(data, bounds, tr);
  check_merit(data, merit);
  // Local regression set: the samples nearest the center, twice the number of
  // quadratic coefficients.
  const int n = data.dim();
  const int p = (n + 1) * (n + 2) / 2;
  const int k = std::min(data.size(), 2 * p);
  std::vector<int> order(static_cast<std::size_t>(data.size()));
  std::iota(order.begin(), order.end(), 0);
  std::vector<double> dist(order.size());
  for (int i = 0; i < data.size(); ++i)
    dist[static_cast<std::size_t>(i)] = (data.X().row(i).transpose() - tr.center).squaredNorm();
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return dist[static_cast<std::size_t>(a)] < dist[static_cast<std::size_t>(b)]; });
  order.resize(static_cast<std::size_t>(k));
  const Dataset local = data.subset(order);

  QuadSurrogates s;
  s.f = fit_quadratic(local.X(), local.y(), 1e-8, false);
  for (int i = 0; i < local.n_constraints(); ++i)
    s.g.push_back(fit_quadratic(local.X(), local.G().col(i), 1e-8, false));
  const search::Region region(bounds, tr.center, tr.radius);
  Matrix pool = tr_pool(region, seed);
  add_constrained_candidates(pool, s, merit, region);
  auto score = [&](const Vector& v) { return model_merit(s, v, merit); };
  const Vector x = search::minimize(score, pool, region, kRefineSteps);
  return finish(x, tr.center, tr.radius, score(tr.center) - score(x), model_violation(s, x) == 0.0);
}

namespace {

// argmin g^T s over ||s|| <= r and a^T s <= beta.
Vector linear_ball_halfspace(const Vector& g, const Vector& a, double beta, double r) {
  const Eigen::Index n = g.size();
  const double gn = g.norm();
  Vector s = gn > 0.0 ? Vector(-r * g / gn) : Vector(Vector::Zero(n));
  if (a.dot(s) <= beta)
    return s;
  const double an = a.norm();
  if (an == 0.0)
    return s;
  const Vector u = a / an;
  const double offset = beta / an; // signed distance of the plane along u
  if (std::abs(offset) > r)
    return -r * u; // plane misses the ball; get as close as possible
  Vector t = -(g - g.dot(u) * u);
  const double tn = t.norm();
  const double rest = std::sqrt(std::max(0.0, r * r - offset * offset));
  Vector out = offset * u;
  if (tn > 0.0)
    out += rest * t / tn;
  return out;
}

} // namespace

Proposal cobyla_step(const Dataset& simplex, const Bounds& bounds, const TrustRegionState& tr,
                     const MeritConfig& merit, std::uint64_t seed) {
  check_tr_inputs(simplex, bounds, tr);
  if (simplex.n_constraints() > 0)
    check_merit(simplex, merit);
  const LinModel f = fit_linear(simplex.X(), simplex.y());
  std::vector<LinModel> g;
  for (int i = 0; i < simplex.n_constraints(); ++i)
    g.push_back(fit_linear(simplex.X(), simplex.G().col(i)));
  const double rho = merit.max_penalty();
  const double step = 0.5 * tr.radius;
  const search::Region region(bounds, tr.center, step);

  auto phi = [&](const Vector& x) {
    double worst = 0.0;
    for (const LinModel& c : g)
      worst = std::max(worst, c(x));
    return f(x) + rho * worst;
  };
  auto violation = [&](const Vector& x) {
    double worst = 0.0;
    for (const LinModel& c : g)
      worst = std::max(worst, c(x));
    return worst;
  };

  Matrix pool = tr_pool(region, seed);
  const Vector& c0 = tr.center;
  const double inf = std::numeric_limits<double>::infinity();
  search::append_row(pool, c0 + linear_ball_halfspace(f.g_hat, Vector::Zero(f.g_hat.size()), inf, step));
  for (const LinModel& c : g) {
    search::append_row(pool, c0 + linear_ball_halfspace(c.g_hat, Vector::Zero(c.g_hat.size()), inf, step));
    search::append_row(pool, c0 + linear_ball_halfspace(f.g_hat + rho * c.g_hat, Vector::Zero(f.g_hat.size()), inf, step));
    search::append_row(pool, c0 + linear_ball_halfspace(f.g_hat, c.g_hat, -c(c0), step));
  }
  // Ties (flat models) resolve toward the center.
  auto score = [&](const Vector& x) { return std::pair<double, double>(phi(x), (x - c0).norm()); };
  const Vector x = search::minimize(score, pool, region, kRefineSteps);
  return finish(x, c0, step, phi(c0) - phi(x), violation(x) <= 0.0);
}

bool simplex_degenerate(const Matrix& vertices, double max_condition) {
  const Eigen::Index n = vertices.cols();
  if (vertices.rows() != n + 1)
    return true;
  Matrix E(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    E.row(i) = vertices.row(i + 1) - vertices.row(0);
  Eigen::JacobiSVD<Matrix> svd(E);
  const Vector sv = svd.singularValues();
  if (sv.size() == 0 || sv[sv.size() - 1] <= 0.0)
    return true;
  return sv[0] / sv[sv.size() - 1] > max_condition;
}

Matrix regular_simplex(const Vector& vertex, double edge, const Bounds& bounds) {
  const Eigen::Index n = vertex.size();
  Matrix V(n + 1, n);
  V.row(0) = vertex.transpose();
  for (Eigen::Index i = 0; i < n; ++i) {
    Vector x = vertex;
    x[i] += edge;
    if (x[i] > bounds.upper()[i])
      x[i] = vertex[i] - edge;
    V.row(i + 1) = bounds.clip(x).transpose();
  }
  return V;
}

} // namespace sbopt

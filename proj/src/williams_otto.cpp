#include "sbopt/casestudies.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace sbopt {

namespace {

using Vec6 = Eigen::Matrix<double, 6, 1>;
using Mat6 = Eigen::Matrix<double, 6, 6>;

constexpr double kTolerance = 1e-10;

Vec6 to_vec(const WoFractions& w) { return Vec6(w.data()); }

WoFractions to_array(const Vec6& v) {
  WoFractions w;
  for (int i = 0; i < 6; ++i)
    w[static_cast<std::size_t>(i)] = v[i];
  return w;
}

std::array<double, 3> rate_constants(double T_R, const WoParams& p) {
  std::array<double, 3> k;
  for (std::size_t i = 0; i < 3; ++i)
    k[i] = p.k0[i] * std::exp(-p.activation_temperature[i] / T_R);
  return k;
}

Vec6 residual(const Vec6& w, double T_R, double M_B, const WoParams& p) {
  return to_vec(wo_residuals(to_array(w), T_R, M_B, p));
}

// Central differences; exact for the bilinear rate terms up to rounding.
Mat6 jacobian(const Vec6& w, double T_R, double M_B, const WoParams& p) {
  Mat6 J;
  for (int j = 0; j < 6; ++j) {
    const double h = 1e-6 * std::max(1.0, std::abs(w[j]));
    Vec6 wp = w, wm = w;
    wp[j] += h;
    wm[j] -= h;
    J.col(j) = (residual(wp, T_R, M_B, p) - residual(wm, T_R, M_B, p)) / (2.0 * h);
  }
  return J;
}

bool newton(Vec6& w, double T_R, double M_B, const WoParams& p, int& iterations) {
  for (int it = 0; it < 100; ++it, ++iterations) {
    const Vec6 r = residual(w, T_R, M_B, p);
    const double norm = r.lpNorm<Eigen::Infinity>();
    if (norm < kTolerance)
      return true;
    const Vec6 d = jacobian(w, T_R, M_B, p).colPivHouseholderQr().solve(-r);
    if (!d.allFinite())
      return false;
    double alpha = 1.0;
    bool accepted = false;
    while (alpha >= 1e-10) {
      const Vec6 trial = w + alpha * d;
      const double tn = residual(trial, T_R, M_B, p).lpNorm<Eigen::Infinity>();
      if (std::isfinite(tn) && tn < (1.0 - 1e-4 * alpha) * norm) {
        w = trial;
        accepted = true;
        break;
      }
      alpha *= 0.5;
    }
    if (!accepted)
      return false;
  }
  return residual(w, T_R, M_B, p).lpNorm<Eigen::Infinity>() < kTolerance;
}

// Implicit Euler on W dw/dt = r(w) with a step that grows as the residual falls.
void pseudo_transient(Vec6& w, double T_R, double M_B, const WoParams& p, int& iterations) {
  double dt = 1.0;
  double previous = residual(w, T_R, M_B, p).lpNorm<Eigen::Infinity>();
  for (int it = 0; it < 500; ++it, ++iterations) {
    const Vec6 r = residual(w, T_R, M_B, p) / p.mass;
    const Mat6 J = jacobian(w, T_R, M_B, p) / p.mass;
    const Mat6 A = Mat6::Identity() / dt - J;
    const Vec6 d = A.colPivHouseholderQr().solve(r);
    if (!d.allFinite()) {
      dt *= 0.25;
      continue;
    }
    w += d;
    w = w.cwiseMax(0.0);
    const double norm = residual(w, T_R, M_B, p).lpNorm<Eigen::Infinity>();
    if (norm < kTolerance)
      return;
    dt = std::min(1e12, dt * std::clamp(previous / std::max(norm, 1e-300), 0.5, 10.0));
    previous = norm;
  }
}

} // namespace

WoFractions wo_residuals(const WoFractions& w, double T_R, double M_B_in, const WoParams& p) {
  const auto k = rate_constants(T_R, p);
  const double F = p.M_A_in + M_B_in;
  const double r1 = k[0] * w[wo_A] * w[wo_B] * p.mass;
  const double r2 = k[1] * w[wo_B] * w[wo_C] * p.mass;
  const double r3 = k[2] * w[wo_C] * w[wo_P] * p.mass;
  WoFractions r;
  r[wo_A] = p.M_A_in - F * w[wo_A] - r1;
  r[wo_B] = M_B_in - F * w[wo_B] - r1 - r2;
  r[wo_C] = -F * w[wo_C] + 2.0 * r1 - 2.0 * r2 - r3;
  r[wo_E] = -F * w[wo_E] + 2.0 * r2;
  r[wo_G] = -F * w[wo_G] + 1.5 * r3;
  r[wo_P] = -F * w[wo_P] + r2 - 0.5 * r3;
  return r;
}

double wo_total_residual(const WoFractions& w, double M_B_in, const WoParams& p) {
  double sum = 0.0;
  for (double v : w)
    sum += v;
  const double F = p.M_A_in + M_B_in;
  return F - F * sum;
}

WoSteadyState wo_solve(double T_R, double M_B_in, const WoParams& p) {
  if (!(T_R > 0.0) || !(M_B_in > 0.0))
    throw ConfigError("wo_solve: T_R and M_B_in must be positive");
  const double F = p.M_A_in + M_B_in;
  const std::array<Vec6, 2> guesses{
      Vec6{{0.1, 0.4, 0.02, 0.2, 0.05, 0.1}},
      Vec6{{p.M_A_in / F, M_B_in / F, 0.0, 0.0, 0.0, 0.0}},
  };
  WoSteadyState out;
  Vec6 best = guesses[0];
  double best_norm = std::numeric_limits<double>::infinity();
  for (const Vec6& g : guesses) {
    Vec6 w = g;
    const bool ok = newton(w, T_R, M_B_in, p, out.iterations);
    const double norm = residual(w, T_R, M_B_in, p).lpNorm<Eigen::Infinity>();
    if (ok && w.minCoeff() >= -1e-12 && w.maxCoeff() <= 1.0 + 1e-12) {
      out.w = to_array(w);
      out.converged = true;
      out.residual_norm = norm;
      return out;
    }
    if (std::isfinite(norm) && norm < best_norm) {
      best_norm = norm;
      best = w;
    }
  }
  Vec6 w = guesses[1];
  pseudo_transient(w, T_R, M_B_in, p, out.iterations);
  newton(w, T_R, M_B_in, p, out.iterations);
  const double norm = residual(w, T_R, M_B_in, p).lpNorm<Eigen::Infinity>();
  if (!(norm < best_norm)) {
    w = best;
  }
  out.w = to_array(w);
  out.residual_norm = residual(w, T_R, M_B_in, p).lpNorm<Eigen::Infinity>();
  out.converged = out.residual_norm < kTolerance && w.minCoeff() >= -1e-12 && w.maxCoeff() <= 1.0 + 1e-12;
  return out;
}

double wo_profit(const WoFractions& w, double M_B_in, const WoParams& p) {
  const double F = p.M_A_in + M_B_in;
  return p.price_P * F * w[wo_P] + p.price_E * F * w[wo_E] - p.cost_A * p.M_A_in - p.cost_B * M_B_in;
}

WoResult wo_objective(double T_R, double M_B_in, const WoParams& p) {
  WoResult out;
  out.state = wo_solve(T_R, M_B_in, p);
  if (!out.state.converged) {
    out.profit = -p.failure_penalty;
    out.objective = p.failure_penalty;
    out.g = Vector::Ones(2);
    return out;
  }
  out.profit = wo_profit(out.state.w, M_B_in, p);
  out.objective = -out.profit;
  out.g = Vector{{out.state.w[wo_A] - p.w_A_max, out.state.w[wo_G] - p.w_G_max}};
  return out;
}

Problem make_williams_otto_problem(const WoParams& params) {
  BlackBox box = [params](const Vector& x) {
    const WoResult r = wo_objective(x[0], x[1], params);
    return Response{r.objective, r.g};
  };
  return Problem("williams-otto", Bounds(Vector{{params.T_min, params.M_B_min}}, Vector{{params.T_max, params.M_B_max}}),
                 2, std::move(box));
}

} // namespace sbopt

#include "sbopt/casestudies.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace sbopt {

CstrState cstr_rhs(const CstrState& s, const CstrControls& u, const CstrParams& p) {
  if (!(p.V > 0.0) || !(p.rho > 0.0) || !(p.Cp > 0.0))
    throw ConfigError("cstr_rhs: V, rho and Cp must be positive");
  if (!std::isfinite(s.CA) || !std::isfinite(s.CB) || !std::isfinite(s.T) || !(s.T > 0.0))
    throw ConfigError("cstr_rhs: non-finite or non-positive state");
  const double rA = p.k0_AB * std::exp(-p.E_AB / (p.R * s.T)) * s.CA;
  const double rB = p.k0_BC * std::exp(-p.E_BC / (p.R * s.T)) * s.CB;
  const double dilution = u.F_in / p.V;
  const double rcp = p.rho * p.Cp;
  CstrState d;
  d.CA = dilution * (p.CAf - s.CA) - rA;
  d.CB = -dilution * s.CB + rA - rB;
  d.T = dilution * (p.Tf - s.T) + p.dH_AB / rcp * rA + p.dH_BC / rcp * rB + p.UA / (p.V * rcp) * (u.T_c - s.T);
  return d;
}

Vector rk4_step(const OdeRhs& rhs, double t, const Vector& y, double dt) {
  const Vector k1 = rhs(t, y);
  const Vector k2 = rhs(t + 0.5 * dt, y + 0.5 * dt * k1);
  const Vector k3 = rhs(t + 0.5 * dt, y + 0.5 * dt * k2);
  const Vector k4 = rhs(t + dt, y + dt * k3);
  return y + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

OdeSolution integrate(const OdeRhs& rhs, const Vector& y0, double dt, double horizon,
                      const std::function<bool(const Vector&)>& blow_up) {
  if (!(dt > 0.0))
    throw ConfigError("integrate: dt must be positive");
  if (!(horizon >= 0.0))
    throw ConfigError("integrate: horizon must be >= 0");
  OdeSolution sol;
  sol.t.push_back(0.0);
  sol.y.push_back(y0);
  const auto steps = static_cast<long>(std::ceil(horizon / dt - 1e-9));
  Vector y = y0;
  double t = 0.0;
  for (long k = 0; k < steps; ++k) {
    const double h = std::min(dt, horizon - t);
    if (!(h > 0.0))
      break;
    y = rk4_step(rhs, t, y, h);
    t = (k + 1 == steps) ? horizon : t + h;
    sol.t.push_back(t);
    sol.y.push_back(y);
    if (!y.allFinite() || (blow_up && blow_up(y))) {
      sol.failed = true;
      break;
    }
  }
  return sol;
}

double pid_output(const PidTerms& terms, const PidSignal& signal, double lo, double hi) {
  const double u = terms.bias + terms.Kp * signal.error + terms.Ki * signal.integral + terms.Kd * signal.derivative;
  if (std::isnan(u))
    return lo;
  return std::clamp(u, lo, hi);
}

PidTerms segment_terms(std::span<const double> theta, int segment, int mv) {
  if (theta.size() != static_cast<std::size_t>(kCstrGainCount))
    throw ConfigError("CSTR controller needs exactly 32 parameters, got " + std::to_string(theta.size()));
  if (segment < 0 || segment >= kCstrSegments || mv < 0 || mv > 1)
    throw ConfigError("segment_terms: index out of range");
  const std::size_t o = static_cast<std::size_t>(segment * 8 + mv * 4);
  return {theta[o], theta[o + 1], theta[o + 2], theta[o + 3]};
}

CstrControls pid_control(std::span<const double> theta, int segment, const PidSignal& signal,
                         const ActuatorLimits& limits) {
  return {pid_output(segment_terms(theta, segment, 0), signal, limits.F_min, limits.F_max),
          pid_output(segment_terms(theta, segment, 1), signal, limits.Tc_min, limits.Tc_max)};
}

namespace {

Vector pack(const CstrState& s) { return Vector{{s.CA, s.CB, s.T}}; }
CstrState unpack(const Vector& y) { return {y[0], y[1], y[2]}; }

int interval_count(double total, double step, const char* what) {
  const double n = total / step;
  const double r = std::round(n);
  if (!(step > 0.0) || r < 1.0 || std::abs(n - r) > 1e-9 * std::max(1.0, n)) {
    std::ostringstream msg;
    msg << "CSTR setup: " << what << " must be a positive multiple of the step";
    throw ConfigError(msg.str());
  }
  return static_cast<int>(r);
}

} // namespace

CstrSimulation simulate_cstr(std::span<const double> theta, const CstrSetup& setup) {
  if (theta.size() != static_cast<std::size_t>(kCstrGainCount))
    throw ConfigError("CSTR controller needs exactly 32 parameters, got " + std::to_string(theta.size()));
  const int per_segment = interval_count(setup.segment_duration, setup.control_interval, "segment duration");
  interval_count(setup.control_interval, setup.dt, "control interval");
  const double ci = setup.control_interval;
  const std::array<double, 2> span{setup.limits.F_max - setup.limits.F_min, setup.limits.Tc_max - setup.limits.Tc_min};

  CstrSimulation sim;
  CstrState state = setup.initial;
  double integral = 0.0;
  double previous_error = 0.0;
  CstrControls previous{};
  auto blow_up = [](const Vector& y) { return std::abs(y[2]) > 1e6 || y[0] < -1e-9 || y[1] < -1e-9 || !(y[2] > 0.0); };

  for (int k = 0; k < kCstrSegments * per_segment; ++k) {
    const int segment = k / per_segment;
    const double sp = setup.setpoints[static_cast<std::size_t>(segment)];
    const double e = sp - state.T;
    integral += e * ci;
    const double derivative = k == 0 ? 0.0 : (e - previous_error) / ci;
    previous_error = e;
    const CstrControls u = pid_control(theta, segment, {e, integral, derivative}, setup.limits);

    sim.time.push_back(k * ci);
    sim.states.push_back(state);
    sim.controls.push_back(u);
    sim.setpoints.push_back(sp);
    sim.tracking_error += e * e;
    if (k > 0) {
      const double dF = 100.0 * (u.F_in - previous.F_in) / span[0];
      const double dT = 100.0 * (u.T_c - previous.T_c) / span[1];
      sim.control_penalty += setup.lambda_u * (dF * dF + dT * dT);
    }
    previous = u;

    const OdeRhs rhs = [&](double, const Vector& y) {
      if (!y.allFinite() || !(y[2] > 0.0))
        return Vector(Vector::Constant(3, std::numeric_limits<double>::quiet_NaN()));
      return pack(cstr_rhs(unpack(y), u, setup.params));
    };
    const OdeSolution step = integrate(rhs, pack(state), setup.dt, ci, blow_up);
    if (step.failed) {
      sim.failed = true;
      break;
    }
    state = unpack(step.y.back());
  }
  return sim;
}

double cstr_cost(std::span<const double> theta, const CstrSetup& setup) {
  const CstrSimulation sim = simulate_cstr(theta, setup);
  const double cost = sim.tracking_error + sim.control_penalty;
  if (sim.failed || !std::isfinite(cost))
    return setup.failure_penalty;
  return cost;
}

double cstr_objective(std::span<const double> theta, const NoiseSpec& noise, std::uint64_t seed,
                      const CstrSetup& setup) {
  double value = cstr_cost(theta, setup);
  if (noise.sigma > 0.0) {
    Rng rng(seed);
    std::normal_distribution<double> normal(0.0, noise.sigma);
    value += normal(rng);
  }
  return value;
}

Bounds cstr_theta_bounds(const CstrSetup& setup) {
  Vector lo(kCstrGainCount), hi(kCstrGainCount);
  for (int i = 0; i < kCstrGainCount; ++i) {
    lo[i] = setup.theta_lower[static_cast<std::size_t>(i % 8)];
    hi[i] = setup.theta_upper[static_cast<std::size_t>(i % 8)];
  }
  return Bounds(lo, hi);
}

Vector cstr_zero_gains(const CstrSetup& setup) {
  Vector theta = Vector::Zero(kCstrGainCount);
  for (int s = 0; s < kCstrSegments; ++s) {
    theta[s * 8 + 3] = setup.nominal_controls.F_in;
    theta[s * 8 + 7] = setup.nominal_controls.T_c;
  }
  return theta;
}

CstrState cstr_steady_state(const CstrControls& controls, const CstrState& guess, const CstrParams& params) {
  Vector y = pack(guess);
  const Vector scale{{params.CAf, params.CAf, params.Tf}};
  auto f = [&](const Vector& v) { return Vector(pack(cstr_rhs(unpack(v), controls, params)).cwiseQuotient(scale)); };
  for (int it = 0; it < 100; ++it) {
    const Vector r = f(y);
    if (r.lpNorm<Eigen::Infinity>() < 1e-14)
      break;
    Matrix J(3, 3);
    for (int j = 0; j < 3; ++j) {
      const double h = 1e-6 * std::max(1.0, std::abs(y[j]));
      Vector yp = y, ym = y;
      yp[j] += h;
      ym[j] -= h;
      J.col(j) = (f(yp) - f(ym)) / (2.0 * h);
    }
    Vector d = J.colPivHouseholderQr().solve(-r);
    double alpha = 1.0;
    const double r0 = r.norm();
    while (alpha > 1e-8) {
      const Vector trial = y + alpha * d;
      if (trial.allFinite() && trial[2] > 0.0 && f(trial).norm() < r0)
        break;
      alpha *= 0.5;
    }
    y += alpha * d;
  }
  return unpack(y);
}

Problem make_cstr_problem(const CstrSetup& setup) {
  BlackBox box = [setup](const Vector& theta) {
    return Response{cstr_cost(std::span<const double>(theta.data(), static_cast<std::size_t>(theta.size())), setup),
                    Vector()};
  };
  return Problem("cstr-pid", cstr_theta_bounds(setup), 0, std::move(box), NoiseSpec{setup.noise_sigma, false});
}

} // namespace sbopt

#ifndef SBOPT_CASESTUDIES_HPP
#define SBOPT_CASESTUDIES_HPP

#include "sbopt/core.hpp"

#include <array>
#include <functional>
#include <string>
#include <vector>

namespace sbopt {

// ---------------------------------------------------------------------------
// CSTR with A -> B -> C kinetics and a cooling jacket, SI units.
// dH_* are heats released (positive for exothermic reactions) and enter the
// energy balance with a plus sign.
// ---------------------------------------------------------------------------

struct CstrParams {
  double V = 0.1;
  double rho = 1000.0;
  double Cp = 239.0;
  double UA = 5.0e4 / 60.0;
  double Tf = 350.0;
  double CAf = 1000.0;
  double dH_AB = 5.0e4;
  double dH_BC = 2.0e4;
  double E_AB = 72747.5;
  double E_BC = 7.5e4;
  double k0_AB = 1.2e9;
  double k0_BC = 8.0e8;
  double R = 8.314;
};

struct CstrState {
  double CA = 0.0;
  double CB = 0.0;
  double T = 0.0;
};

struct CstrControls {
  double F_in = 0.0;
  double T_c = 0.0;
};

/// Time derivative of (CA, CB, T). Throws ConfigError on non-finite state or
/// non-positive V, rho, Cp.
CstrState cstr_rhs(const CstrState& state, const CstrControls& controls, const CstrParams& params);

using OdeRhs = std::function<Vector(double t, const Vector& y)>;

Vector rk4_step(const OdeRhs& rhs, double t, const Vector& y, double dt);

struct OdeSolution {
  std::vector<double> t;
  std::vector<Vector> y;
  bool failed = false;
};

/// Classical RK4 with fixed step; the last step is shortened to land on the
/// horizon. Stops early and sets `failed` when `blow_up` returns true.
OdeSolution integrate(const OdeRhs& rhs, const Vector& y0, double dt, double horizon,
                      const std::function<bool(const Vector&)>& blow_up = {});

struct PidTerms {
  double Kp = 0.0;
  double Ki = 0.0;
  double Kd = 0.0;
  double bias = 0.0;
};

struct PidSignal {
  double error = 0.0;
  double integral = 0.0;
  double derivative = 0.0;
};

/// bias + Kp e + Ki int(e) + Kd de/dt, clipped to [lo, hi].
double pid_output(const PidTerms& terms, const PidSignal& signal, double lo, double hi);

struct ActuatorLimits {
  double F_min = 0.5e-3;
  double F_max = 3.0e-3;
  double Tc_min = 250.0;
  double Tc_max = 350.0;
};

inline constexpr int kCstrSegments = 4;
inline constexpr int kCstrGainCount = 32;

/// theta[segment * 8 + mv * 4 + k] with mv 0 = F_in, 1 = T_c and
/// k = (Kp, Ki, Kd, bias).
PidTerms segment_terms(std::span<const double> theta, int segment, int mv);

/// Both manipulated variables driven by the same temperature error.
CstrControls pid_control(std::span<const double> theta, int segment, const PidSignal& signal,
                         const ActuatorLimits& limits);

struct CstrSetup {
  CstrParams params;
  CstrState initial{874.0784, 120.8798, 324.8267};
  std::array<double, kCstrSegments> setpoints{330.0, 340.0, 335.0, 345.0};
  double segment_duration = 100.0;
  double control_interval = 5.0;
  double dt = 0.1;
  ActuatorLimits limits;
  double lambda_u = 0.01;
  double failure_penalty = 1e6;
  double noise_sigma = 1.0;
  // Per (mv, k) bounds for theta, repeated for every segment.
  std::array<double, 8> theta_lower{-1e-4, -1e-5, -1e-4, 0.5e-3, 0.0, 0.0, 0.0, 250.0};
  std::array<double, 8> theta_upper{1e-4, 1e-5, 1e-4, 3.0e-3, 20.0, 0.5, 20.0, 350.0};
  // Bias used by the "no feedback" reference controller.
  CstrControls nominal_controls{100.0 / 60.0 / 1000.0, 300.0};
};

struct CstrSimulation {
  std::vector<double> time;       // control instants
  std::vector<CstrState> states;  // state at each control instant
  std::vector<CstrControls> controls;
  std::vector<double> setpoints;
  double tracking_error = 0.0; // sum of squared errors
  double control_penalty = 0.0;
  bool failed = false;
};

CstrSimulation simulate_cstr(std::span<const double> theta, const CstrSetup& setup = {});

/// Noise-free closed-loop cost: sum e^2 + lambda_u sum (100 du / span)^2, or
/// the failure penalty when the trajectory blows up.
double cstr_cost(std::span<const double> theta, const CstrSetup& setup = {});
/// cstr_cost plus N(0, noise.sigma^2) drawn from `seed`.
double cstr_objective(std::span<const double> theta, const NoiseSpec& noise, std::uint64_t seed,
                      const CstrSetup& setup = {});

Bounds cstr_theta_bounds(const CstrSetup& setup = {});
/// Zero PID gains with nominal biases.
Vector cstr_zero_gains(const CstrSetup& setup = {});
/// Steady state of the open loop for constant controls (Newton on cstr_rhs).
CstrState cstr_steady_state(const CstrControls& controls, const CstrState& guess, const CstrParams& params = {});

Problem make_cstr_problem(const CstrSetup& setup = {});

// ---------------------------------------------------------------------------
// Williams-Otto reactor at steady state.
// Reactions A + B -> C, B + C -> P + E, C + P -> G with rates
// k_i = k0_i exp(-Ea_i / T_R) (activation temperatures in K).
// ---------------------------------------------------------------------------

struct WoParams {
  std::array<double, 3> k0{1.6599e6, 7.2117e8, 2.6745e12};
  std::array<double, 3> activation_temperature{6666.7, 8333.3, 11111.0};
  double mass = 2105.0;  // kg holdup W
  double M_A_in = 1.8275; // kg/s
  double price_P = 1143.38;
  double price_E = 25.92;
  double cost_A = 76.23;
  double cost_B = 114.34;
  double w_A_max = 0.12;
  double w_G_max = 0.08;
  double T_min = 343.15;
  double T_max = 373.15;
  double M_B_min = 4.0;
  double M_B_max = 7.0;
  double failure_penalty = 1e6;
};

enum WoComponent { wo_A = 0, wo_B, wo_C, wo_E, wo_G, wo_P };

using WoFractions = std::array<double, 6>;

/// Component mass balances (kg/s) in the order A, B, C, E, G, P.
WoFractions wo_residuals(const WoFractions& w, double T_R, double M_B_in, const WoParams& params = {});
/// M_A + M_B - (M_A + M_B) sum(w): the sum of the component residuals.
double wo_total_residual(const WoFractions& w, double M_B_in, const WoParams& params = {});

struct WoSteadyState {
  WoFractions w{};
  bool converged = false;
  int iterations = 0;
  double residual_norm = 0.0; // infinity norm
};

/// Damped Newton with a finite-difference Jacobian, then pseudo-transient
/// continuation if Newton stalls. Converged means residual inf-norm < 1e-10.
WoSteadyState wo_solve(double T_R, double M_B_in, const WoParams& params = {});

struct WoResult {
  double profit = 0.0;
  double objective = 0.0; // -profit, or the failure penalty
  Vector g;               // (w_A - 0.12, w_G - 0.08), or (1, 1) on failure
  WoSteadyState state;
};

double wo_profit(const WoFractions& w, double M_B_in, const WoParams& params = {});
WoResult wo_objective(double T_R, double M_B_in, const WoParams& params = {});

Problem make_williams_otto_problem(const WoParams& params = {});

// ---------------------------------------------------------------------------
// Defaults file (JSON with comments)
// ---------------------------------------------------------------------------

struct CaseStudyConfig {
  CstrSetup cstr;
  WoParams williams_otto;
};

CaseStudyConfig load_casestudy_config(const std::string& path);

} // namespace sbopt

#endif // SBOPT_CASESTUDIES_HPP

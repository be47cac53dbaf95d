#ifndef SBOPT_SURROGATES_HPP
#define SBOPT_SURROGATES_HPP

#include "sbopt/core.hpp"

#include <cstdint>
#include <optional>

namespace sbopt {

// ---------------------------------------------------------------------------
// Gaussian process regression
//
// Zero-mean GP on standardized targets with a squared-exponential ARD kernel
//   k(x, x') = s2 * exp(-0.5 * sum_j ((x_j - x'_j) / l_j)^2).
// Hyperparameters not fixed by the caller are chosen by maximizing the log
// marginal likelihood: random multi-start in log space, then coordinate-wise
// golden-section refinement.
// ---------------------------------------------------------------------------

struct NoiseMode {
  bool estimated = true;
  double value = 0.0;

  static NoiseMode fixed(double variance) { return {false, variance}; }
  static NoiseMode estimate() { return {true, 0.0}; }
};

struct GpFitOptions {
  NoiseMode noise = NoiseMode::estimate();
  std::optional<Vector> lengthscales;    // fixes the lengthscales
  std::optional<double> signal_variance; // fixes s2 (standardized units)
  // Per-dimension domain width used to bound lengthscales to [1e-2, 1e2] * width.
  // Defaults to the data range (or 1 where the range is zero).
  std::optional<Vector> length_scale_reference;
  bool standardize = true;
  std::uint64_t seed = 0;
  int n_starts = 8;
  int refine_sweeps = 2;
  double min_noise_variance = 1e-8; // estimated-noise search range, standardized units
  double max_noise_variance = 1.0;
};

struct GpModel {
  Matrix X_train;
  Vector y_train; // standardized targets
  Vector lengthscales;
  double signal_variance = 1.0;
  double noise_variance = 0.0;
  double jitter = 0.0;
  Matrix chol_factor; // lower-triangular L with L L^T = K + (noise + jitter) I
  Vector alpha;       // (K + (noise + jitter) I)^{-1} y_train
  double y_mean = 0.0;
  double y_std = 1.0;

  double kernel(const Vector& a, const Vector& b) const;
  /// K(X,X) + (noise + jitter) I, assembled directly.
  Matrix kernel_matrix() const;
};

struct GpPrediction {
  double mean = 0.0;
  double variance = 0.0;
};

/// Duplicate rows (within 1e-10) are merged with averaged targets before fitting.
GpModel fit_gp(const Matrix& X, const Vector& y, const GpFitOptions& options = {});
GpModel fit_gp(const Dataset& data, const GpFitOptions& options = {});

/// Posterior mean and variance in the original (de-standardized) units.
GpPrediction gp_posterior(const GpModel& model, const Vector& x);

struct LikelihoodTerms {
  double data_fit = 0.0;   // -0.5 y^T K^{-1} y
  double complexity = 0.0; // -0.5 log det K
  double normalization = 0.0;
  double total() const { return data_fit + complexity + normalization; }
};

LikelihoodTerms gp_likelihood_terms(const GpModel& model);
double gp_log_marginal_likelihood(const GpModel& model);

// ---------------------------------------------------------------------------
// Polynomial least-squares surrogates
// ---------------------------------------------------------------------------

/// f(x) = x^T Q x + c^T x + b with symmetric Q.
struct QuadModel {
  Matrix Q;
  Vector c;
  double b = 0.0;

  double operator()(const Vector& x) const;
  Vector gradient(const Vector& x) const;
};

/// Ridge least squares over (Q, c, b), refined by a few iterated-Tikhonov
/// passes. The intercept is not penalized. With fewer samples than
/// coefficients the minimum-norm solution is returned.
/// psd_project clips negative eigenvalues of Q to zero.
QuadModel fit_quadratic(const Matrix& X, const Vector& y, double ridge = 1e-8, bool psd_project = false);

/// Frobenius-nearest positive semidefinite matrix to the symmetric part of Q.
Matrix psd_project(const Matrix& Q);

/// f(x) = g_hat^T x + b
struct LinModel {
  Vector g_hat;
  double b = 0.0;

  double operator()(const Vector& x) const { return g_hat.dot(x) + b; }
};

LinModel fit_linear(const Matrix& X, const Vector& y, double ridge = 1e-8);

// ---------------------------------------------------------------------------
// Cubic RBF interpolant with linear tail
//   s(x) = sum_i lambda_i ||x - x_i||^3 + c_0 + c_{1..n}^T x
// ---------------------------------------------------------------------------

struct RbfModel {
  Matrix centers;
  Vector lambda;
  Vector poly_coeffs; // (c_0, c_1, ..., c_n)
  double condition_estimate = 0.0;
};

/// Throws FitFailure when the tail matrix is rank deficient or the saddle
/// system is singular.
RbfModel fit_rbf(const Matrix& X, const Vector& y);
RbfModel fit_rbf(const Dataset& data);

double rbf_predict(const RbfModel& model, const Vector& x);

/// Merges rows closer than tol (Euclidean), averaging targets. Keeps first-seen order.
void merge_duplicate_rows(Matrix& X, Vector& y, double tol = 1e-10);

} // namespace sbopt

#endif // SBOPT_SURROGATES_HPP

#include "sbopt/surrogates.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>

namespace sbopt {

namespace {

constexpr double kMinJitter = 1e-10;
constexpr double kMaxJitter = 1e-4;
constexpr double kNegInf = -std::numeric_limits<double>::infinity();

struct Factorization {
  Matrix L;
  Vector alpha;
  double jitter = 0.0;
  bool ok = false;
};

// Per-dimension squared differences, reused across hyperparameter trials.
struct SquaredDistances {
  std::vector<Matrix> per_dim;

  explicit SquaredDistances(const Matrix& X) {
    const Eigen::Index n = X.rows();
    per_dim.reserve(X.cols());
    for (Eigen::Index j = 0; j < X.cols(); ++j) {
      Matrix D(n, n);
      for (Eigen::Index a = 0; a < n; ++a)
        for (Eigen::Index b = 0; b < n; ++b) {
          const double diff = X(a, j) - X(b, j);
          D(a, b) = diff * diff;
        }
      per_dim.push_back(std::move(D));
    }
  }

  Matrix kernel(const Vector& lengthscales, double signal_variance) const {
    const Eigen::Index n = per_dim.empty() ? 0 : per_dim.front().rows();
    Matrix S = Matrix::Zero(n, n);
    for (std::size_t j = 0; j < per_dim.size(); ++j)
      S.noalias() += per_dim[j] / (lengthscales[j] * lengthscales[j]);
    return signal_variance * (-0.5 * S).array().exp().matrix();
  }
};

Factorization factorize(const Matrix& K, double noise_variance, const Vector& y) {
  Factorization f;
  for (double jitter = kMinJitter; jitter <= kMaxJitter * 1.0001; jitter *= 10.0) {
    Matrix A = K;
    A.diagonal().array() += noise_variance + jitter;
    Eigen::LLT<Matrix> llt(A);
    if (llt.info() != Eigen::Success)
      continue;
    Matrix L = llt.matrixL();
    if (!L.allFinite() || (L.diagonal().array() <= 0.0).any())
      continue;
    f.L = std::move(L);
    f.alpha = llt.solve(y);
    f.jitter = jitter;
    f.ok = f.alpha.allFinite();
    if (f.ok)
      return f;
  }
  return f;
}

double log_likelihood(const Factorization& f, const Vector& y) {
  if (!f.ok)
    return kNegInf;
  const double n = static_cast<double>(y.size());
  return -0.5 * y.dot(f.alpha) - f.L.diagonal().array().log().sum() -
         0.5 * n * std::log(2.0 * std::numbers::pi);
}

// Search space layout: [log lengthscales (if free), log s2 (if free), log noise (if free)].
struct HyperSpace {
  bool free_lengthscales = true;
  bool free_signal = true;
  bool free_noise = true;
  Vector fixed_lengthscales;
  double fixed_signal = 1.0;
  double fixed_noise = 0.0;
  Vector lo;
  Vector hi;
  int dim = 0;

  void decode(const Vector& theta, Vector& ls, double& s2, double& noise) const {
    int k = 0;
    if (free_lengthscales) {
      ls = theta.head(dim).array().exp();
      k += dim;
    } else {
      ls = fixed_lengthscales;
    }
    s2 = free_signal ? std::exp(theta[k++]) : fixed_signal;
    noise = free_noise ? std::exp(theta[k++]) : fixed_noise;
  }
};

double golden_section_max(const std::function<double(double)>& f, double a, double b, int iterations,
                          double& best_x) {
  const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - invphi * (b - a);
  double d = a + invphi * (b - a);
  double fc = f(c);
  double fd = f(d);
  for (int i = 0; i < iterations; ++i) {
    if (fc > fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - invphi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + invphi * (b - a);
      fd = f(d);
    }
  }
  if (fc > fd) {
    best_x = c;
    return fc;
  }
  best_x = d;
  return fd;
}

} // namespace

double GpModel::kernel(const Vector& a, const Vector& b) const {
  const double s = ((a - b).cwiseQuotient(lengthscales)).squaredNorm();
  return signal_variance * std::exp(-0.5 * s);
}

Matrix GpModel::kernel_matrix() const {
  const Eigen::Index n = X_train.rows();
  Matrix K(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      K(i, j) = kernel(X_train.row(i).transpose(), X_train.row(j).transpose());
  K.diagonal().array() += noise_variance + jitter;
  return K;
}

void merge_duplicate_rows(Matrix& X, Vector& y, double tol) {
  const Eigen::Index n = X.rows();
  std::vector<Eigen::Index> kept;
  std::vector<double> sum;
  std::vector<int> count;
  for (Eigen::Index i = 0; i < n; ++i) {
    Eigen::Index match = -1;
    for (std::size_t k = 0; k < kept.size(); ++k)
      if ((X.row(i) - X.row(kept[k])).norm() <= tol) {
        match = static_cast<Eigen::Index>(k);
        break;
      }
    if (match < 0) {
      kept.push_back(i);
      sum.push_back(y[i]);
      count.push_back(1);
    } else {
      sum[match] += y[i];
      count[match] += 1;
    }
  }
  if (static_cast<Eigen::Index>(kept.size()) == n)
    return;
  Matrix Xm(kept.size(), X.cols());
  Vector ym(kept.size());
  for (std::size_t k = 0; k < kept.size(); ++k) {
    Xm.row(k) = X.row(kept[k]);
    ym[k] = sum[k] / count[k];
  }
  X = std::move(Xm);
  y = std::move(ym);
}

GpModel fit_gp(const Dataset& data, const GpFitOptions& options) {
  return fit_gp(data.X(), data.y(), options);
}

GpModel fit_gp(const Matrix& X_in, const Vector& y_in, const GpFitOptions& options) {
  if (X_in.rows() != y_in.size())
    throw ConfigError("fit_gp: X rows and y length differ");
  if (X_in.rows() < 1)
    throw ConfigError("fit_gp: no data");
  if (!y_in.allFinite() || !X_in.allFinite())
    throw FitFailure("fit_gp: non-finite data");

  Matrix X = X_in;
  Vector y = y_in;
  merge_duplicate_rows(X, y);
  const int n = static_cast<int>(X.rows());
  const int d = static_cast<int>(X.cols());

  GpModel model;
  model.X_train = X;
  if (options.standardize) {
    model.y_mean = y.mean();
    const double var = (y.array() - model.y_mean).square().mean();
    const double sd = std::sqrt(var);
    model.y_std = (sd > 1e-12 * std::max(1.0, std::abs(model.y_mean))) ? sd : 1.0;
  }
  model.y_train = (y.array() - model.y_mean) / model.y_std;

  Vector reference = Vector::Ones(d);
  if (options.length_scale_reference) {
    reference = *options.length_scale_reference;
  } else if (n > 1) {
    const Vector range = X.colwise().maxCoeff() - X.colwise().minCoeff();
    for (int j = 0; j < d; ++j)
      if (range[j] > 0.0)
        reference[j] = range[j];
  }

  HyperSpace space;
  space.dim = d;
  space.free_lengthscales = !options.lengthscales.has_value();
  space.free_signal = !options.signal_variance.has_value();
  space.free_noise = options.noise.estimated;
  if (options.lengthscales) {
    if (options.lengthscales->size() != d || (options.lengthscales->array() <= 0.0).any())
      throw ConfigError("fit_gp: fixed lengthscales must be positive, one per dimension");
    space.fixed_lengthscales = *options.lengthscales;
  }
  if (options.signal_variance) {
    if (!(*options.signal_variance > 0.0))
      throw ConfigError("fit_gp: signal variance must be positive");
    space.fixed_signal = *options.signal_variance;
  }
  if (!options.noise.estimated) {
    if (!(options.noise.value >= 0.0))
      throw ConfigError("fit_gp: noise variance must be >= 0");
    space.fixed_noise = options.noise.value;
  }

  const int n_free = (space.free_lengthscales ? d : 0) + (space.free_signal ? 1 : 0) + (space.free_noise ? 1 : 0);
  space.lo.resize(n_free);
  space.hi.resize(n_free);
  {
    int k = 0;
    if (space.free_lengthscales)
      for (int j = 0; j < d; ++j, ++k) {
        space.lo[k] = std::log(1e-2 * reference[j]);
        space.hi[k] = std::log(1e2 * reference[j]);
      }
    if (space.free_signal) {
      space.lo[k] = std::log(1e-4);
      space.hi[k] = std::log(1e4);
      ++k;
    }
    if (space.free_noise) {
      space.lo[k] = std::log(options.min_noise_variance);
      space.hi[k] = std::log(options.max_noise_variance);
    }
  }

  const SquaredDistances dist(X);
  auto objective = [&](const Vector& theta) {
    Vector ls;
    double s2 = 0.0;
    double noise = 0.0;
    space.decode(theta, ls, s2, noise);
    return log_likelihood(factorize(dist.kernel(ls, s2), noise, model.y_train), model.y_train);
  };

  Vector theta(n_free);
  if (n_free > 0) {
    Rng rng(options.seed);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    double best = kNegInf;
    // First start is a fixed heuristic (lengthscale ~ domain/2, unit signal, small noise).
    Vector start(n_free);
    {
      int k = 0;
      if (space.free_lengthscales)
        for (int j = 0; j < d; ++j, ++k)
          start[k] = std::log(0.5 * reference[j]);
      if (space.free_signal)
        start[k++] = 0.0;
      if (space.free_noise)
        start[k] = std::clamp(std::log(1e-4), space.lo[k], space.hi[k]);
    }
    for (int s = 0; s < std::max(1, options.n_starts); ++s) {
      if (s > 0)
        for (int k = 0; k < n_free; ++k)
          start[k] = space.lo[k] + unif(rng) * (space.hi[k] - space.lo[k]);
      const double v = objective(start);
      if (v > best) {
        best = v;
        theta = start;
      }
    }
    for (int sweep = 0; sweep < options.refine_sweeps; ++sweep) {
      for (int k = 0; k < n_free; ++k) {
        const double a = std::max(space.lo[k], theta[k] - 2.0);
        const double b = std::min(space.hi[k], theta[k] + 2.0);
        Vector trial = theta;
        double arg = theta[k];
        const double v = golden_section_max(
            [&](double t) {
              trial[k] = t;
              return objective(trial);
            },
            a, b, 20, arg);
        if (v > best) {
          best = v;
          theta[k] = arg;
        }
      }
    }
    if (!std::isfinite(best))
      throw FitFailure("fit_gp: kernel matrix not positive definite for any hyperparameter trial");
  }

  space.decode(theta, model.lengthscales, model.signal_variance, model.noise_variance);
  Factorization f = factorize(dist.kernel(model.lengthscales, model.signal_variance), model.noise_variance,
                              model.y_train);
  if (!f.ok)
    throw FitFailure("fit_gp: Cholesky failed with jitter up to 1e-4");
  model.chol_factor = std::move(f.L);
  model.alpha = std::move(f.alpha);
  model.jitter = f.jitter;
  return model;
}

GpPrediction gp_posterior(const GpModel& model, const Vector& x) {
  const Eigen::Index n = model.X_train.rows();
  Vector kstar(n);
  for (Eigen::Index i = 0; i < n; ++i)
    kstar[i] = model.kernel(model.X_train.row(i).transpose(), x);
  const double mean_std = kstar.dot(model.alpha);
  const Vector v = model.chol_factor.triangularView<Eigen::Lower>().solve(kstar);
  const double var_std = std::max(0.0, model.signal_variance - v.squaredNorm());
  return {model.y_mean + model.y_std * mean_std, model.y_std * model.y_std * var_std};
}

LikelihoodTerms gp_likelihood_terms(const GpModel& model) {
  LikelihoodTerms t;
  const double n = static_cast<double>(model.y_train.size());
  t.data_fit = -0.5 * model.y_train.dot(model.alpha);
  t.complexity = -model.chol_factor.diagonal().array().log().sum();
  t.normalization = -0.5 * n * std::log(2.0 * std::numbers::pi);
  return t;
}

double gp_log_marginal_likelihood(const GpModel& model) { return gp_likelihood_terms(model).total(); }

} // namespace sbopt

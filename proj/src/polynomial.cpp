#include "sbopt/surrogates.hpp"

#include <algorithm>
#include <cmath>

namespace sbopt {

namespace {

constexpr int kTikhonovPasses = 4;

// Inputs are centered on the sample mean and divided by one scalar, so the
// regression is well scaled and eigenvectors of Q are unaffected.
struct Normalization {
  Vector center;
  double scale = 1.0;

  explicit Normalization(const Matrix& X) {
    center = X.colwise().mean().transpose();
    const double s = (X.rowwise() - center.transpose()).cwiseAbs().maxCoeff();
    scale = (s > 0.0 && std::isfinite(s)) ? s : 1.0;
  }

  Matrix apply(const Matrix& X) const { return (X.rowwise() - center.transpose()) / scale; }
};

// Iterated Tikhonov: min ||A t - y||^2 + ridge * ||t_penalized - t_prev||^2
// from t_prev = 0, where every column but `free_column` is penalized.
Vector ridge_solve(const Matrix& A, const Vector& y, double ridge, Eigen::Index free_column) {
  if (!(ridge >= 0.0))
    throw ConfigError("ridge must be >= 0");
  const Eigen::Index n = A.rows();
  const Eigen::Index p = A.cols();
  if (ridge == 0.0)
    return Eigen::CompleteOrthogonalDecomposition<Matrix>(A).solve(y);
  Matrix Aug = Matrix::Zero(n + p - 1, p);
  Aug.topRows(n) = A;
  const double r = std::sqrt(ridge);
  Eigen::Index row = n;
  for (Eigen::Index j = 0; j < p; ++j) {
    if (j == free_column)
      continue;
    Aug(row++, j) = r;
  }
  const Eigen::CompleteOrthogonalDecomposition<Matrix> cod(Aug);
  Vector rhs = Vector::Zero(n + p - 1);
  Vector theta = Vector::Zero(p);
  for (int pass = 0; pass < kTikhonovPasses; ++pass) {
    rhs.head(n) = y - A * theta;
    theta += cod.solve(rhs);
  }
  return theta;
}

} // namespace

double QuadModel::operator()(const Vector& x) const { return x.dot(Q * x) + c.dot(x) + b; }

Vector QuadModel::gradient(const Vector& x) const { return 2.0 * Q * x + c; }

Matrix psd_project(const Matrix& Q) {
  const Matrix S = 0.5 * (Q + Q.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> eig(S);
  if (eig.info() != Eigen::Success)
    throw FitFailure("psd_project: eigendecomposition failed");
  const Vector lambda = eig.eigenvalues().cwiseMax(0.0);
  Matrix P = eig.eigenvectors() * lambda.asDiagonal() * eig.eigenvectors().transpose();
  return 0.5 * (P + P.transpose());
}

QuadModel fit_quadratic(const Matrix& X, const Vector& y, double ridge, bool psd) {
  if (X.rows() < 1)
    throw ConfigError("fit_quadratic: need at least one sample");
  if (X.rows() != y.size())
    throw ConfigError("fit_quadratic: X rows and y length differ");
  const Eigen::Index n = X.rows();
  const Eigen::Index d = X.cols();
  const Eigen::Index n_quad = d * (d + 1) / 2;
  const Eigen::Index p = n_quad + d + 1;

  const Normalization norm(X);
  const Matrix Z = norm.apply(X);

  Matrix A(n, p);
  for (Eigen::Index r = 0; r < n; ++r) {
    Eigen::Index k = 0;
    for (Eigen::Index i = 0; i < d; ++i)
      for (Eigen::Index j = i; j < d; ++j)
        A(r, k++) = Z(r, i) * Z(r, j);
    for (Eigen::Index i = 0; i < d; ++i)
      A(r, k++) = Z(r, i);
    A(r, k) = 1.0;
  }
  const Vector theta = ridge_solve(A, y, ridge, p - 1);

  Matrix Qz = Matrix::Zero(d, d);
  {
    Eigen::Index k = 0;
    for (Eigen::Index i = 0; i < d; ++i)
      for (Eigen::Index j = i; j < d; ++j, ++k) {
        if (i == j) {
          Qz(i, i) = theta[k];
        } else {
          Qz(i, j) = 0.5 * theta[k];
          Qz(j, i) = 0.5 * theta[k];
        }
      }
  }
  const Vector cz = theta.segment(n_quad, d);
  const double bz = theta[p - 1];
  // Projecting in centered coordinates keeps the model gradient at the data centroid.
  if (psd)
    Qz = psd_project(Qz);

  const double s = norm.scale;
  const Vector& m = norm.center;
  QuadModel model;
  model.Q = Qz / (s * s);
  model.Q = 0.5 * (model.Q + model.Q.transpose());
  model.c = cz / s - 2.0 * model.Q * m;
  model.b = bz - cz.dot(m) / s + m.dot(model.Q * m);
  return model;
}

LinModel fit_linear(const Matrix& X, const Vector& y, double ridge) {
  if (X.rows() < 1)
    throw ConfigError("fit_linear: need at least one sample");
  if (X.rows() != y.size())
    throw ConfigError("fit_linear: X rows and y length differ");
  const Eigen::Index n = X.rows();
  const Eigen::Index d = X.cols();
  const Normalization norm(X);
  Matrix A(n, d + 1);
  A.leftCols(d) = norm.apply(X);
  A.col(d).setOnes();
  const Vector theta = ridge_solve(A, y, ridge, d);
  LinModel model;
  model.g_hat = theta.head(d) / norm.scale;
  model.b = theta[d] - theta.head(d).dot(norm.center) / norm.scale;
  return model;
}

} // namespace sbopt

#include "sbopt/surrogates.hpp"

#include <cmath>
#include <sstream>

namespace sbopt {

RbfModel fit_rbf(const Dataset& data) { return fit_rbf(data.X(), data.y()); }

RbfModel fit_rbf(const Matrix& X_in, const Vector& y_in) {
  if (X_in.rows() != y_in.size())
    throw ConfigError("fit_rbf: X rows and y length differ");
  Matrix X = X_in;
  Vector y = y_in;
  merge_duplicate_rows(X, y);
  const Eigen::Index n = X.rows();
  const Eigen::Index d = X.cols();
  if (n < d + 1)
    throw FitFailure("fit_rbf: need at least n_x + 1 distinct points");
  if (!X.allFinite() || !y.allFinite())
    throw FitFailure("fit_rbf: non-finite data");

  Matrix P(n, d + 1);
  P.col(0).setOnes();
  P.rightCols(d) = X;
  Eigen::ColPivHouseholderQR<Matrix> qr(P);
  if (qr.rank() < d + 1) {
    std::ostringstream msg;
    msg << "fit_rbf: polynomial tail matrix has rank " << qr.rank() << " < " << d + 1;
    throw FitFailure(msg.str());
  }

  const Eigen::Index m = n + d + 1;
  Matrix A = Matrix::Zero(m, m);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) {
      const double r = (X.row(i) - X.row(j)).norm();
      A(i, j) = r * r * r;
    }
  A.topRightCorner(n, d + 1) = P;
  A.bottomLeftCorner(d + 1, n) = P.transpose();
  Vector rhs = Vector::Zero(m);
  rhs.head(n) = y;

  Eigen::PartialPivLU<Matrix> lu(A);
  const double rcond = lu.rcond();
  if (!(rcond > 1e-15)) {
    std::ostringstream msg;
    msg << "fit_rbf: saddle system singular (rcond " << rcond << ")";
    throw FitFailure(msg.str());
  }
  const Vector sol = lu.solve(rhs);
  if (!sol.allFinite())
    throw FitFailure("fit_rbf: non-finite coefficients");

  RbfModel model;
  model.centers = std::move(X);
  model.lambda = sol.head(n);
  model.poly_coeffs = sol.tail(d + 1);
  model.condition_estimate = 1.0 / rcond;
  return model;
}

double rbf_predict(const RbfModel& model, const Vector& x) {
  double s = model.poly_coeffs[0] + model.poly_coeffs.tail(x.size()).dot(x);
  for (Eigen::Index i = 0; i < model.centers.rows(); ++i) {
    const double r = (model.centers.row(i).transpose() - x).norm();
    s += model.lambda[i] * r * r * r;
  }
  return s;
}

} // namespace sbopt

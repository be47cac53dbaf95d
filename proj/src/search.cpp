#include "sbopt/search.hpp"

#include <algorithm>
#include <cmath>

namespace sbopt::search {

Region::Region(Bounds box) : box_(std::move(box)) {}

Region::Region(Bounds box, Vector center, double radius)
    : box_(std::move(box)), center_(std::move(center)), radius_(radius) {
  if (!(radius_ > 0.0))
    throw ConfigError("search region: radius must be positive");
  if (center_->size() != box_.dim())
    throw ConfigError("search region: center has wrong dimension");
}

Vector Region::project(const Vector& x) const {
  if (!center_)
    return box_.clip(x);
  Vector d = x - *center_;
  const double n = d.norm();
  if (n > radius_)
    d *= radius_ / n;
  return box_.clip(*center_ + d);
}

double Region::scale() const { return center_ ? radius_ : box_.width().mean(); }

Matrix Region::sample(int n, std::uint64_t seed) const {
  if (!center_)
    return latin_hypercube(box_, n, seed);
  const Eigen::Index d = box_.dim();
  Rng rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  Matrix out(n, d);
  for (int r = 0; r < n; ++r) {
    Vector dir(d);
    for (Eigen::Index j = 0; j < d; ++j)
      dir[j] = normal(rng);
    const double norm = dir.norm();
    if (norm == 0.0)
      dir.setZero();
    else
      dir /= norm;
    const double rho = radius_ * std::pow(unif(rng), 1.0 / static_cast<double>(d));
    out.row(r) = box_.clip(*center_ + rho * dir).transpose();
  }
  return out;
}

Vector solve_trust_region_subproblem(const Matrix& H, const Vector& g, double radius) {
  const Eigen::Index n = g.size();
  if (H.rows() != n || H.cols() != n)
    throw ConfigError("trust-region subproblem: dimension mismatch");
  if (!(radius > 0.0))
    return Vector::Zero(n);
  Eigen::SelfAdjointEigenSolver<Matrix> eig(0.5 * (H + H.transpose()));
  const Vector lam = eig.eigenvalues(); // ascending
  const Matrix& V = eig.eigenvectors();
  const Vector a = V.transpose() * g;
  const double lam_scale = std::max(1.0, lam.cwiseAbs().maxCoeff());
  const double eps = 1e-12 * lam_scale;
  const double a_tol = 1e-14 * (1.0 + g.norm());

  // Step s(mu) = -sum a_i / (lam_i + mu) v_i, skipping components whose
  // denominator vanishes (callers only do so when a_i is negligible).
  auto step = [&](double mu) {
    Vector coeff(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      const double den = lam[i] + mu;
      coeff[i] = (std::abs(den) <= eps) ? 0.0 : -a[i] / den;
    }
    return Vector(V * coeff);
  };
  auto singular_directions_excited = [&](double mu) {
    for (Eigen::Index i = 0; i < n; ++i)
      if (std::abs(lam[i] + mu) <= eps && std::abs(a[i]) > a_tol)
        return true;
    return false;
  };

  const double lam_min = lam[0];
  if (lam_min >= -eps) {
    // Convex model: interior Newton (pseudo-inverse) step if it fits.
    if (!singular_directions_excited(0.0)) {
      Vector s = step(0.0);
      if (s.norm() <= radius)
        return s;
    }
  }

  const double mu_lo = std::max(0.0, -lam_min);
  if (!singular_directions_excited(mu_lo)) {
    Vector s = step(mu_lo);
    const double sn = s.norm();
    if (sn <= radius) {
      // Hard case: move along the leftmost eigenvector to the boundary.
      const double tau = std::sqrt(std::max(0.0, radius * radius - sn * sn));
      if (lam_min < -eps)
        s += tau * V.col(0);
      return s;
    }
  }

  // Boundary solution: ||s(mu)|| = radius is decreasing in mu on (mu_lo, inf).
  double lo = mu_lo;
  double hi = mu_lo + g.norm() / radius + lam_scale;
  while (step(hi).norm() > radius)
    hi *= 2.0;
  for (int it = 0; it < 200 && hi - lo > 1e-15 * std::max(1.0, hi); ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi)
      break;
    if (step(mid).norm() > radius)
      lo = mid;
    else
      hi = mid;
  }
  Vector s = step(hi);
  const double sn = s.norm();
  if (sn > 0.0)
    s *= radius / sn;
  return s;
}

void append_rows(Matrix& candidates, const Matrix& rows) {
  if (rows.rows() == 0)
    return;
  const Eigen::Index n = candidates.rows();
  if (n == 0) {
    candidates = rows;
    return;
  }
  candidates.conservativeResize(n + rows.rows(), Eigen::NoChange);
  candidates.bottomRows(rows.rows()) = rows;
}

void append_row(Matrix& candidates, const Vector& row) { append_rows(candidates, row.transpose()); }

} // namespace sbopt::search

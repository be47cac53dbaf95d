#ifndef SBOPT_SEARCH_HPP
#define SBOPT_SEARCH_HPP

#include "sbopt/core.hpp"

#include <optional>

// Inner (surrogate) minimization shared by every optimizer: a candidate pool
// evaluated on the surrogate score, then coordinate-wise pattern search from
// the best candidate. Scores only need operator<, so lexicographic pairs work
// for "feasibility first" rankings.

namespace sbopt::search {

/// Feasible set of an inner problem: the box, optionally intersected with a ball.
class Region {
public:
  explicit Region(Bounds box);
  Region(Bounds box, Vector center, double radius);

  const Bounds& box() const { return box_; }
  bool has_ball() const { return center_.has_value(); }
  const Vector& center() const { return *center_; }
  double radius() const { return radius_; }

  /// Radial pull into the ball, then clip to the box. Clipping never moves a
  /// point away from an in-box center, so the result lies in both sets.
  Vector project(const Vector& x) const;

  /// Natural step length: the radius, or the mean box width.
  double scale() const;

  /// n points: Latin hypercube over the box, or uniform in the ball (then clipped).
  Matrix sample(int n, std::uint64_t seed) const;

private:
  Bounds box_;
  std::optional<Vector> center_;
  double radius_ = 0.0;
};

/// argmin_s g^T s + 0.5 s^T H s subject to ||s|| <= radius, for symmetric H
/// (indefinite allowed; the hard case is handled).
Vector solve_trust_region_subproblem(const Matrix& H, const Vector& g, double radius);

template <class ScoreFn>
Vector pattern_search(const ScoreFn& score, Vector x, const Region& region, int iterations) {
  auto best = score(x);
  double step = 0.25 * region.scale();
  for (int it = 0; it < iterations; ++it) {
    bool improved = false;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      for (double sign : {1.0, -1.0}) {
        Vector trial = x;
        trial[i] += sign * step;
        trial = region.project(trial);
        auto v = score(trial);
        if (v < best) {
          best = v;
          x = std::move(trial);
          improved = true;
        }
      }
    }
    if (!improved)
      step *= 0.5;
  }
  return x;
}

/// Best row of `candidates` (first wins ties), refined by pattern search.
template <class ScoreFn>
Vector minimize(const ScoreFn& score, const Matrix& candidates, const Region& region, int refine_iterations) {
  Vector best_x = region.project(candidates.row(0).transpose());
  auto best = score(best_x);
  for (Eigen::Index r = 1; r < candidates.rows(); ++r) {
    Vector x = region.project(candidates.row(r).transpose());
    auto v = score(x);
    if (v < best) {
      best = v;
      best_x = std::move(x);
    }
  }
  return pattern_search(score, std::move(best_x), region, refine_iterations);
}

/// Appends rows to a candidate matrix.
void append_rows(Matrix& candidates, const Matrix& rows);
void append_row(Matrix& candidates, const Vector& row);

} // namespace sbopt::search

#endif // SBOPT_SEARCH_HPP

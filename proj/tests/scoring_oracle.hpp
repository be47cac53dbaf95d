#ifndef SBOPT_TESTS_SCORING_ORACLE_HPP
#define SBOPT_TESTS_SCORING_ORACLE_HPP

// Second scorer written from the protocol text alone, used as an oracle.

#include <algorithm>
#include <cstddef>
#include <vector>

namespace oracle {

// runs[a][rep][k]: raw objective values of algorithm a. Returns p per algorithm.
inline std::vector<double> score_p(const std::vector<std::vector<std::vector<double>>>& runs, int warmup) {
  const std::size_t n_alg = runs.size();
  const std::size_t n_eval = runs[0][0].size();
  std::vector<std::vector<double>> mean(n_alg, std::vector<double>(n_eval, 0.0));
  for (std::size_t a = 0; a < n_alg; ++a) {
    for (const auto& ys : runs[a]) {
      double best = ys[0];
      for (std::size_t k = 0; k < n_eval; ++k) {
        if (ys[k] < best)
          best = ys[k];
        mean[a][k] += best / static_cast<double>(runs[a].size());
      }
    }
  }
  std::vector<double> p(n_alg, 0.0);
  const std::size_t counted = n_eval - static_cast<std::size_t>(warmup);
  for (std::size_t k = static_cast<std::size_t>(warmup); k < n_eval; ++k) {
    double lo = mean[0][k], hi = mean[0][k];
    for (std::size_t a = 1; a < n_alg; ++a) {
      lo = std::min(lo, mean[a][k]);
      hi = std::max(hi, mean[a][k]);
    }
    for (std::size_t a = 0; a < n_alg; ++a) {
      const double r = hi == lo ? 1.0 : (hi - mean[a][k]) / (hi - lo);
      p[a] += r / static_cast<double>(counted);
    }
  }
  return p;
}

using RunSet = std::vector<std::vector<std::vector<double>>>;

// Three hand-crafted trajectory sets of 20 evaluations each (d = 2 protocol).
inline std::vector<RunSet> synthetic_sets() {
  std::vector<RunSet> sets;
  // Varied decreasing sequences with different speeds, three algorithms, three repetitions.
  RunSet a(3);
  for (int alg = 0; alg < 3; ++alg)
    for (int rep = 0; rep < 3; ++rep) {
      std::vector<double> ys;
      for (int k = 0; k < 20; ++k)
        ys.push_back(10.0 / (1.0 + (alg + 1) * 0.3 * k) + 0.1 * ((k * 7 + rep * 3 + alg) % 5));
      a[static_cast<std::size_t>(alg)].push_back(ys);
    }
  sets.push_back(a);
  // Identical algorithms: every iteration is a tie.
  RunSet b(2);
  for (int alg = 0; alg < 2; ++alg)
    for (int rep = 0; rep < 2; ++rep) {
      std::vector<double> ys;
      for (int k = 0; k < 20; ++k)
        ys.push_back(5.0 - 0.2 * k + rep);
      b[static_cast<std::size_t>(alg)].push_back(ys);
    }
  sets.push_back(b);
  // The first algorithm wins only during warm-up; then the curves tie and later cross.
  RunSet c(2);
  std::vector<double> fast(20, 1.0), slow(20, 3.0);
  for (int k = 5; k < 20; ++k)
    slow[static_cast<std::size_t>(k)] = k < 12 ? 1.0 : 0.5;
  c[0] = {fast};
  c[1] = {slow};
  sets.push_back(c);
  return sets;
}

} // namespace oracle

#endif

#ifndef SBOPT_PROBLEMS_HPP
#define SBOPT_PROBLEMS_HPP

#include "sbopt/core.hpp"

#include <string>
#include <string_view>
#include <vector>

namespace sbopt {

inline constexpr double kViolationThreshold = 1e-3;

// Unconstrained test functions, global minimum 0.
double ackley(const Vector& x, double a = 20.0, double b = 0.2, double c = 2.0 * 3.14159265358979323846);
double levy(const Vector& x);
double rosenbrock(const Vector& x);
double quadratic_ill(const Vector& x, double a = 1.9);

/// "ackley", "levy", "rosenbrock" or "quadratic" on [-5, 5]^dim.
Problem make_test_function(std::string_view name, int dim);

/// Two-dimensional constrained problems on [-5, 5]^2 with one constraint
/// g(x) <= 0: "rosenbrock", "quadratic" or "matyas".
Problem constrained_suite(std::string_view name);

struct ProtocolBudget {
  int evaluations = 0;
  int warmup = 0;
};

/// Evaluations and warm-up length per dimension: 2 -> 20/5, 5 -> 50/10,
/// 7 -> 80/13, 10 -> 100/15. Other dimensions raise ConfigError.
ProtocolBudget protocol_budget(int dim);
bool has_protocol_budget(int dim);

/// Registry keys: "<function>-d<dim>" (any dim >= 1), "<name>-c", "cstr-pid", "williams-otto".
Problem make_problem(std::string_view key);
/// Keys with fixed dimension plus the test functions at dims 2, 5, 7 and 10.
std::vector<std::string> registry_keys();
/// Problems of a suite: "unconstrained" (needs dims), "constrained", "casestudies".
std::vector<std::string> suite_problem_keys(std::string_view suite, const std::vector<int>& dims);

/// Levenshtein distance, used for "did you mean" hints.
std::size_t edit_distance(std::string_view a, std::string_view b);
std::string nearest_key(std::string_view key, const std::vector<std::string>& candidates);

} // namespace sbopt

#endif // SBOPT_PROBLEMS_HPP

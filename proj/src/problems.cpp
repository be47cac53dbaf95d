#include "sbopt/problems.hpp"
#include "sbopt/casestudies.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <numbers>

namespace sbopt {

double ackley(const Vector& x, double a, double b, double c) {
  const double n = static_cast<double>(x.size());
  if (x.size() == 0)
    throw ConfigError("ackley: empty input");
  const double sq = x.squaredNorm() / n;
  const double cs = x.unaryExpr([c](double v) { return std::cos(c * v); }).sum() / n;
  return -a * std::exp(-b * std::sqrt(sq)) - std::exp(cs) + a + std::numbers::e;
}

double levy(const Vector& x) {
  const Eigen::Index n = x.size();
  if (n == 0)
    throw ConfigError("levy: empty input");
  const double pi = std::numbers::pi;
  auto w = [&](Eigen::Index i) { return 1.0 + (x[i] - 1.0) / 4.0; };
  auto sin2 = [](double v) {
    const double s = std::sin(v);
    return s * s;
  };
  double f = sin2(pi * w(0));
  for (Eigen::Index i = 0; i + 1 < n; ++i) {
    const double wi = w(i);
    f += (wi - 1.0) * (wi - 1.0) * (1.0 + 10.0 * sin2(pi * wi + 1.0));
  }
  const double wn = w(n - 1);
  f += (wn - 1.0) * (wn - 1.0) * (1.0 + sin2(2.0 * pi * wn));
  return f;
}

double rosenbrock(const Vector& x) {
  if (x.size() < 2)
    throw ConfigError("rosenbrock: needs at least 2 dimensions");
  double f = 0.0;
  for (Eigen::Index i = 0; i + 1 < x.size(); ++i) {
    const double t = x[i + 1] - x[i] * x[i];
    f += 100.0 * t * t + (1.0 - x[i]) * (1.0 - x[i]);
  }
  return f;
}

double quadratic_ill(const Vector& x, double a) {
  const Eigen::Index n = x.size();
  if (n == 0)
    throw ConfigError("quadratic_ill: empty input");
  const double xn = x[n - 1];
  double f = 0.0;
  for (Eigen::Index k = 0; k < n; ++k) {
    const double i = static_cast<double>(k + 1);
    f += (i * x[k]) * (i * x[k]) + (a * i / static_cast<double>(n)) * x[k] * xn;
  }
  return f;
}

namespace {

const std::vector<std::string>& test_function_names() {
  static const std::vector<std::string> names{"ackley", "levy", "rosenbrock", "quadratic"};
  return names;
}

const std::vector<std::string>& constrained_names() {
  static const std::vector<std::string> names{"rosenbrock", "quadratic", "matyas"};
  return names;
}

std::string unknown(std::string_view what, std::string_view key, const std::vector<std::string>& valid) {
  std::string msg = "unknown " + std::string(what) + " '" + std::string(key) + "'";
  const std::string hint = nearest_key(key, valid);
  if (!hint.empty())
    msg += " (did you mean '" + hint + "'?)";
  msg += "; valid:";
  for (const auto& v : valid)
    msg += " " + v;
  return msg;
}

} // namespace

Problem make_test_function(std::string_view name, int dim) {
  if (dim < 1)
    throw ConfigError("test function dimension must be >= 1");
  const Bounds bounds = Bounds::uniform(dim, -5.0, 5.0);
  const std::string key = std::string(name) + "-d" + std::to_string(dim);
  if (name == "ackley")
    return Problem(key, bounds, 0, [](const Vector& x) { return Response{ackley(x), Vector()}; }, {},
                   KnownOptimum{Vector::Zero(dim), 0.0});
  if (name == "levy")
    return Problem(key, bounds, 0, [](const Vector& x) { return Response{levy(x), Vector()}; }, {},
                   KnownOptimum{Vector::Ones(dim), 0.0});
  if (name == "rosenbrock") {
    if (dim < 2)
      throw ConfigError("rosenbrock needs dimension >= 2");
    return Problem(key, bounds, 0, [](const Vector& x) { return Response{rosenbrock(x), Vector()}; }, {},
                   KnownOptimum{Vector::Ones(dim), 0.0});
  }
  if (name == "quadratic")
    return Problem(key, bounds, 0, [](const Vector& x) { return Response{quadratic_ill(x), Vector()}; }, {},
                   KnownOptimum{Vector::Zero(dim), 0.0});
  throw ConfigError(unknown("test function", name, test_function_names()));
}

Problem constrained_suite(std::string_view name) {
  const Bounds bounds = Bounds::uniform(2, -5.0, 5.0);
  const std::string key = std::string(name) + "-c";
  if (name == "rosenbrock")
    return Problem(key, bounds, 1, [](const Vector& x) {
      const double g = x[0] + 1.27 - 2.83 * x[1] + 0.69 * x[1] * x[1];
      return Response{rosenbrock(x), Vector{{g}}};
    });
  if (name == "quadratic")
    return Problem(key, bounds, 1, [](const Vector& x) {
      const double f = x[0] * x[0] + 0.95 * x[0] * x[1] + 5.9 * x[1] * x[1];
      return Response{f, Vector{{1.5 * x[0] + 0.6 - x[1]}}};
    });
  if (name == "matyas")
    return Problem(key, bounds, 1, [](const Vector& x) {
      const double f = 0.26 * (x[0] * x[0] + x[1] * x[1]) - 0.48 * x[0] * x[1];
      return Response{f, Vector{{6.31 * x[0] + 3.60 - x[1]}}};
    });
  throw ConfigError(unknown("constrained problem", name, constrained_names()));
}

bool has_protocol_budget(int dim) { return dim == 2 || dim == 5 || dim == 7 || dim == 10; }

ProtocolBudget protocol_budget(int dim) {
  switch (dim) {
  case 2:
    return {20, 5};
  case 5:
    return {50, 10};
  case 7:
    return {80, 13};
  case 10:
    return {100, 15};
  default:
    throw ConfigError("no default budget for dimension " + std::to_string(dim) + "; set the budget explicitly");
  }
}

std::vector<std::string> registry_keys() {
  std::vector<std::string> keys;
  for (const auto& f : test_function_names())
    for (int d : {2, 5, 7, 10})
      keys.push_back(f + "-d" + std::to_string(d));
  for (const auto& c : constrained_names())
    keys.push_back(c + "-c");
  keys.emplace_back("cstr-pid");
  keys.emplace_back("williams-otto");
  return keys;
}

Problem make_problem(std::string_view key) {
  if (key == "cstr-pid")
    return make_cstr_problem();
  if (key == "williams-otto")
    return make_williams_otto_problem();
  if (key.size() > 2 && key.substr(key.size() - 2) == "-c") {
    const std::string_view name = key.substr(0, key.size() - 2);
    if (std::find(constrained_names().begin(), constrained_names().end(), name) != constrained_names().end())
      return constrained_suite(name);
  }
  if (const auto pos = key.rfind("-d"); pos != std::string_view::npos) {
    const std::string_view name = key.substr(0, pos);
    const std::string_view digits = key.substr(pos + 2);
    int dim = 0;
    const auto [end, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), dim);
    if (ec == std::errc() && end == digits.data() + digits.size() && dim >= 1 &&
        std::find(test_function_names().begin(), test_function_names().end(), name) != test_function_names().end())
      return make_test_function(name, dim);
  }
  throw ConfigError(unknown("problem", key, registry_keys()));
}

std::vector<std::string> suite_problem_keys(std::string_view suite, const std::vector<int>& dims) {
  std::vector<std::string> keys;
  if (suite == "unconstrained") {
    for (int d : dims)
      for (const auto& f : test_function_names())
        keys.push_back(f + "-d" + std::to_string(d));
  } else if (suite == "constrained") {
    for (const auto& c : constrained_names())
      keys.push_back(c + "-c");
  } else if (suite == "casestudies") {
    keys = {"cstr-pid", "williams-otto"};
  } else {
    throw ConfigError(unknown("suite", suite, {"unconstrained", "constrained", "casestudies"}));
  }
  return keys;
}

std::size_t edit_distance(std::string_view a, std::string_view b) {
  std::vector<std::size_t> row(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j)
    row[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    std::size_t diag = row[0];
    row[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t up = row[j];
      row[j] = std::min({row[j] + 1, row[j - 1] + 1, diag + (a[i - 1] == b[j - 1] ? 0u : 1u)});
      diag = up;
    }
  }
  return row[b.size()];
}

std::string nearest_key(std::string_view key, const std::vector<std::string>& candidates) {
  std::string best;
  std::size_t best_d = std::numeric_limits<std::size_t>::max();
  for (const auto& c : candidates) {
    const std::size_t d = edit_distance(key, c);
    if (d < best_d) {
      best_d = d;
      best = c;
    }
  }
  return best;
}

} // namespace sbopt

#include "sbopt/bench.hpp"
#include "sbopt/casestudies.hpp"
#include "sbopt/optimizers.hpp"
#include "sbopt/problems.hpp"
#include "sbopt/surrogates.hpp"

#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

namespace py = pybind11;
using namespace sbopt;

namespace {

Matrix trajectory_x(const Trajectory& t) {
  const Eigen::Index d = t.evaluations.empty() ? 0 : t.evaluations.front().x.size();
  Matrix X(t.size(), d);
  for (int i = 0; i < t.size(); ++i)
    X.row(i) = t.evaluations[static_cast<std::size_t>(i)].x.transpose();
  return X;
}

Matrix trajectory_g(const Trajectory& t) {
  const Eigen::Index m = t.evaluations.empty() ? 0 : t.evaluations.front().g.size();
  Matrix G(t.size(), m);
  for (int i = 0; i < t.size(); ++i)
    if (m > 0)
      G.row(i) = t.evaluations[static_cast<std::size_t>(i)].g.transpose();
  return G;
}

Problem python_problem(const std::string& name, const Vector& lower, const Vector& upper, int n_constraints,
                       const py::function& fn) {
  BlackBox box = [fn, n_constraints](const Vector& x) {
    py::gil_scoped_acquire gil;
    const py::object r = fn(x);
    if (n_constraints == 0)
      return Response{r.cast<double>(), Vector()};
    const auto pair = r.cast<std::pair<double, Vector>>();
    return Response{pair.first, pair.second};
  };
  return Problem(name, Bounds(lower, upper), n_constraints, std::move(box));
}

py::dict response_dict(const Response& r) {
  py::dict d;
  d["f"] = r.f;
  d["g"] = r.g;
  return d;
}

} // namespace

PYBIND11_MODULE(_sbopt, m) {
  m.doc() = "Surrogate-based optimization toolkit";

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<FitFailure>(m, "FitFailure", PyExc_RuntimeError);
  py::register_exception<EvaluationFailure>(m, "EvaluationFailure", PyExc_RuntimeError);
  py::register_exception<BudgetExhausted>(m, "BudgetExhausted", PyExc_RuntimeError);

  // Problems
  m.def("ackley", [](const Vector& x) { return ackley(x); }, py::arg("x"));
  m.def("levy", &levy, py::arg("x"));
  m.def("rosenbrock", &rosenbrock, py::arg("x"));
  m.def("quadratic_ill", &quadratic_ill, py::arg("x"), py::arg("a") = 1.9);
  m.def("registry_keys", &registry_keys);
  m.def("suite_problem_keys", &suite_problem_keys, py::arg("suite"), py::arg("dims") = std::vector<int>{});

  py::class_<Problem>(m, "Problem")
      .def(py::init(&python_problem), py::arg("name"), py::arg("lower"), py::arg("upper"),
           py::arg("n_constraints"), py::arg("function"),
           "Wraps a Python callable. It returns f, or (f, g) when n_constraints > 0.")
      .def_property_readonly("name", &Problem::name)
      .def_property_readonly("dim", &Problem::dim)
      .def_property_readonly("n_constraints", &Problem::n_constraints)
      .def_property_readonly("lower", [](const Problem& p) { return p.bounds().lower(); })
      .def_property_readonly("upper", [](const Problem& p) { return p.bounds().upper(); })
      .def("__call__", [](const Problem& p, const Vector& x) { return response_dict(p(x)); }, py::arg("x"));
  m.def("make_problem", &make_problem, py::arg("key"));

  // Optimizers
  py::class_<Trajectory>(m, "Trajectory")
      .def_property_readonly("X", &trajectory_x)
      .def_property_readonly("y", [](const Trajectory& t) { return t.objective_values(); })
      .def_property_readonly("G", &trajectory_g)
      .def_property_readonly("best_so_far", [](const Trajectory& t) { return best_so_far(t); })
      .def_readonly("budget", &Trajectory::budget)
      .def_readonly("seed", &Trajectory::seed)
      .def_readonly("notes", &Trajectory::notes)
      .def("__len__", &Trajectory::size)
      .def("csv", [](const Trajectory& t, int dim, int n_constraints) { return trajectory_csv(t, dim, n_constraints); },
           py::arg("dim"), py::arg("n_constraints"));

  m.def("algorithms", [] {
    std::vector<std::string> tags;
    for (Algorithm a : all_algorithms())
      tags.emplace_back(to_string(a));
    return tags;
  });
  m.def("handles_constraints", [](const std::string& tag) { return handles_constraints(parse_algorithm(tag)); },
        py::arg("algorithm"));
  m.def(
      "run_optimizer",
      [](const std::string& algorithm, const Problem& problem, int budget, std::uint64_t seed) {
        py::gil_scoped_release release;
        return run_optimizer(algorithm, problem, budget, seed);
      },
      py::arg("algorithm"), py::arg("problem"), py::arg("budget"), py::arg("seed") = 0);
  m.def(
      "final_incumbent",
      [](const Trajectory& t, double threshold) {
        const Evaluation& e = final_incumbent(t, threshold);
        py::dict d;
        d["x"] = e.x;
        d["y"] = e.y;
        d["g"] = e.g;
        d["index"] = e.index;
        return d;
      },
      py::arg("trajectory"), py::arg("threshold") = 1e-3);
  m.def("lcb", &lcb, py::arg("mu"), py::arg("sigma"), py::arg("gamma"));
  m.def("latin_hypercube", [](const Vector& lo, const Vector& hi, int n, std::uint64_t seed) {
    return latin_hypercube(Bounds(lo, hi), n, seed);
  }, py::arg("lower"), py::arg("upper"), py::arg("n"), py::arg("seed") = 0);

  // Surrogates
  m.def(
      "gp_fit_predict",
      [](const Matrix& X, const Vector& y, const Matrix& Xq, std::optional<double> noise, std::uint64_t seed) {
        GpFitOptions o;
        if (noise)
          o.noise = NoiseMode::fixed(*noise);
        o.seed = seed;
        const GpModel model = fit_gp(X, y, o);
        Vector mean(Xq.rows()), var(Xq.rows());
        for (Eigen::Index i = 0; i < Xq.rows(); ++i) {
          const GpPrediction p = gp_posterior(model, Xq.row(i).transpose());
          mean[i] = p.mean;
          var[i] = p.variance;
        }
        return std::make_pair(mean, var);
      },
      py::arg("X"), py::arg("y"), py::arg("X_query"), py::arg("noise_variance") = py::none(), py::arg("seed") = 0,
      "Fits a GP (hyperparameters by marginal likelihood) and returns (mean, variance) at X_query.");
  m.def(
      "fit_quadratic",
      [](const Matrix& X, const Vector& y, double ridge, bool psd) {
        const QuadModel q = fit_quadratic(X, y, ridge, psd);
        return py::make_tuple(q.Q, q.c, q.b);
      },
      py::arg("X"), py::arg("y"), py::arg("ridge") = 1e-8, py::arg("psd_project") = false,
      "Returns (Q, c, b) of f(x) = x^T Q x + c^T x + b.");
  m.def(
      "rbf_fit_predict",
      [](const Matrix& X, const Vector& y, const Matrix& Xq) {
        const RbfModel model = fit_rbf(X, y);
        Vector out(Xq.rows());
        for (Eigen::Index i = 0; i < Xq.rows(); ++i)
          out[i] = rbf_predict(model, Xq.row(i).transpose());
        return out;
      },
      py::arg("X"), py::arg("y"), py::arg("X_query"));

  // Scoring and benchmarks
  m.def("score_r", &score_r, py::arg("worst"), py::arg("best"), py::arg("mean"));
  m.def("score_p", [](const std::vector<double>& r) { return score_p(r); }, py::arg("r"));
  m.def(
      "count_violations",
      [](const std::vector<double>& g, double threshold) {
        const ViolationStats s = count_violations(g, threshold);
        return py::make_tuple(s.feasible_fraction, s.mean_violation);
      },
      py::arg("max_constraint"), py::arg("threshold") = 1e-3,
      "Returns (feasible_fraction, mean_violation).");
  m.def(
      "run_benchmark",
      [](const std::string& config_json, const std::filesystem::path& directory) {
        const BenchmarkConfig config = config_from_json(config_json);
        BenchmarkResult r;
        {
          py::gil_scoped_release release;
          r = run_benchmark(config, directory);
        }
        return py::make_tuple(scores_json(r.scores), r.all_ok());
      },
      py::arg("config_json"), py::arg("directory"),
      "Runs a benchmark from a JSON config; returns (scores_json, all_ok).");
  m.def("rescore", [](const std::filesystem::path& dir) { return scores_json(rescore(dir)); }, py::arg("directory"));

  // Case studies
  m.def(
      "cstr_cost",
      [](const Vector& theta) { return cstr_cost(std::span<const double>(theta.data(), static_cast<std::size_t>(theta.size()))); },
      py::arg("theta"));
  m.def("cstr_zero_gains", [] { return cstr_zero_gains(); });
  m.def(
      "wo_objective",
      [](double T_R, double M_B_in) {
        const WoResult r = wo_objective(T_R, M_B_in);
        py::dict d;
        d["profit"] = r.profit;
        d["g"] = r.g;
        d["converged"] = r.state.converged;
        d["w"] = r.state.w;
        return d;
      },
      py::arg("T_R"), py::arg("M_B_in"));

  m.attr("__version__") = toolkit_version();
}

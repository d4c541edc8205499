// Python bindings: expression evaluation, curvature operators, soliton
// residuals and the scenario runner. Reports cross the boundary as JSON
// strings so python sees exactly what the CLI writes.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "qys/checks.hpp"
#include "qys/soliton.hpp"

namespace py = pybind11;
using namespace qys;

namespace {

// Metric rows follow the scenario schema: row i lists the n-i entries of the
// upper triangle from the diagonal on. Full n x n rows are accepted too.
MetricPatch make_patch(const std::vector<std::string>& names,
                       const std::vector<std::vector<std::string>>& upper_rows,
                       const std::vector<std::string>& constraints) {
  Chart ch = Chart::make(names, constraints);
  std::size_t n = names.size();
  std::vector<std::vector<std::string>> rows = upper_rows;
  for (std::size_t i = 0; i < rows.size() && i < n; ++i)
    if (rows[i].size() == n - i)
      rows[i].insert(rows[i].begin(), i, std::string());
  return MetricPatch::make(ch, rows);
}

std::vector<std::vector<double>> tensor2_list(const TensorValue& t) {
  int n = t.dim();
  std::vector<std::vector<double>> out(n, std::vector<double>(n));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) out[i][j] = t(i, j);
  return out;
}

CheckOptions make_options(std::optional<double> tol,
                          std::optional<std::uint64_t> seed, int points,
                          int jet_order, bool strict) {
  CheckOptions opts;
  opts.tol = tol;
  opts.seed = seed;
  opts.points = points;
  opts.jet_order = jet_order;
  opts.strict = strict;
  return opts;
}

std::string run_to_json(const Scenario& sc, const CheckOptions& opts) {
  return run_scenario(sc, opts).to_json().dump(2);
}

}  // namespace

PYBIND11_MODULE(qys, m) {
  m.doc() = "Chart-based curvature and soliton residual checks";

  py::register_exception<Error>(m, "QysError", PyExc_ValueError);

  m.def(
      "eval_expr",
      [](const std::string& src, const std::vector<std::string>& names,
         const std::vector<double>& point) {
        return Expr::parse(src).bind(names).eval(point);
      },
      py::arg("source"), py::arg("names"), py::arg("point"),
      "Parse an expression, bind coordinates by name and evaluate.");

  m.def(
      "scalar_curvature",
      [](const std::vector<std::string>& names,
         const std::vector<std::vector<std::string>>& metric,
         const std::vector<double>& point,
         const std::vector<std::string>& constraints) {
        return scalar_curvature(make_patch(names, metric, constraints), point);
      },
      py::arg("names"), py::arg("metric"), py::arg("point"),
      py::arg("constraints") = std::vector<std::string>{});

  m.def(
      "ricci",
      [](const std::vector<std::string>& names,
         const std::vector<std::vector<std::string>>& metric,
         const std::vector<double>& point,
         const std::vector<std::string>& constraints) {
        return tensor2_list(
            ricci(make_patch(names, metric, constraints), point));
      },
      py::arg("names"), py::arg("metric"), py::arg("point"),
      py::arg("constraints") = std::vector<std::string>{});

  m.def(
      "hessian",
      [](const std::vector<std::string>& names,
         const std::vector<std::vector<std::string>>& metric,
         const std::string& f, const std::vector<double>& point,
         const std::vector<std::string>& constraints) {
        MetricPatch g = make_patch(names, metric, constraints);
        return tensor2_list(
            hessian(g, ScalarField::make(g.chart(), f), point));
      },
      py::arg("names"), py::arg("metric"), py::arg("f"), py::arg("point"),
      py::arg("constraints") = std::vector<std::string>{});

  m.def(
      "laplacian",
      [](const std::vector<std::string>& names,
         const std::vector<std::vector<std::string>>& metric,
         const std::string& f, const std::vector<double>& point,
         const std::vector<std::string>& constraints) {
        MetricPatch g = make_patch(names, metric, constraints);
        return laplacian(g, ScalarField::make(g.chart(), f), point);
      },
      py::arg("names"), py::arg("metric"), py::arg("f"), py::arg("point"),
      py::arg("constraints") = std::vector<std::string>{});

  m.def(
      "soliton_residual_max",
      [](const std::vector<std::string>& names,
         const std::vector<std::vector<std::string>>& metric,
         const std::string& f, double lam, double mu,
         const std::vector<std::vector<double>>& points,
         const std::vector<std::string>& constraints) {
        MetricPatch g = make_patch(names, metric, constraints);
        return residual_under_constants(g, ScalarField::make(g.chart(), f),
                                        lam, mu, points);
      },
      py::arg("names"), py::arg("metric"), py::arg("f"), py::arg("lam"),
      py::arg("mu"), py::arg("points"),
      py::arg("constraints") = std::vector<std::string>{},
      "Max gradient-soliton residual under the given constants.");

  m.def(
      "fit_constants",
      [](const std::vector<std::string>& names,
         const std::vector<std::vector<std::string>>& metric,
         const std::string& f, const std::vector<std::vector<double>>& points,
         const std::vector<std::string>& constraints) {
        MetricPatch g = make_patch(names, metric, constraints);
        FitResult r =
            fit_constants(g, ScalarField::make(g.chart(), f), points);
        py::dict d;
        d["lambda"] = r.lambda;
        d["mu"] = r.mu;
        d["max_residual"] = r.max_residual;
        d["identifiable"] = r.identifiable;
        d["mu_identifiable"] = r.mu_identifiable;
        return d;
      },
      py::arg("names"), py::arg("metric"), py::arg("f"), py::arg("points"),
      py::arg("constraints") = std::vector<std::string>{});

  m.def("builtin_names", &builtin_names);
  m.def(
      "builtin_json",
      [](const std::string& name) { return builtin(name).to_json().dump(2); },
      py::arg("name"));

  m.def(
      "run_builtin",
      [](const std::string& name, std::optional<double> tol,
         std::optional<std::uint64_t> seed, int points, int jet_order,
         bool strict) {
        return run_to_json(builtin(name),
                           make_options(tol, seed, points, jet_order, strict));
      },
      py::arg("name"), py::arg("tol") = py::none(),
      py::arg("seed") = py::none(), py::arg("points") = -1,
      py::arg("jet_order") = 4, py::arg("strict") = false,
      "Run a builtin scenario; returns the JSON report.");

  m.def(
      "run_scenario_json",
      [](const std::string& text, std::optional<double> tol,
         std::optional<std::uint64_t> seed, int points, int jet_order,
         bool strict) {
        nlohmann::json j;
        try {
          j = nlohmann::json::parse(text);
        } catch (const nlohmann::json::parse_error& e) {
          throw InputError(std::string("scenario: ") + e.what());
        }
        return run_to_json(Scenario::from_json(j),
                           make_options(tol, seed, points, jet_order, strict));
      },
      py::arg("scenario_json"), py::arg("tol") = py::none(),
      py::arg("seed") = py::none(), py::arg("points") = -1,
      py::arg("jet_order") = 4, py::arg("strict") = false,
      "Run a scenario given as a JSON string; returns the JSON report.");
}

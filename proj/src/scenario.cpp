#include "qys/scenario.hpp"

#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

namespace qys {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

[[noreturn]] void schema_error(const std::string& path, const std::string& what) {
  throw InputError("scenario schema: " + path + ": " + what);
}

const json& need(const json& j, const char* key, const std::string& path) {
  if (!j.is_object() || !j.contains(key))
    schema_error(path + "." + key, "missing required field");
  return j.at(key);
}

std::string need_string(const json& j, const char* key, const std::string& path) {
  const json& v = need(j, key, path);
  if (!v.is_string()) schema_error(path + "." + key, "expected a string");
  return v.get<std::string>();
}

std::vector<std::string> string_list(const json& v, const std::string& path) {
  if (!v.is_array()) schema_error(path, "expected an array of strings");
  std::vector<std::string> out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!v[i].is_string())
      schema_error(path + "[" + std::to_string(i) + "]", "expected a string");
    out.push_back(v[i].get<std::string>());
  }
  return out;
}

}  // namespace

Scenario Scenario::from_json(const json& j) {
  if (!j.is_object()) schema_error("$", "scenario must be a JSON object");
  Scenario sc;
  sc.name = need_string(j, "name", "$");

  if (j.contains("warped")) {
    const json& w = j.at("warped");
    WarpedRef ref;
    auto resolve = [&](const char* key, std::shared_ptr<Scenario>& inl,
                       std::string& name) {
      const json& v = need(w, key, "$.warped");
      if (v.is_string()) {
        name = v.get<std::string>();
      } else if (v.is_object()) {
        inl = std::make_shared<Scenario>(from_json(v));
      } else {
        schema_error(std::string("$.warped.") + key,
                     "expected a builtin name or an inline scenario object");
      }
    };
    resolve("base", ref.base_inline, ref.base_name);
    resolve("fiber", ref.fiber_inline, ref.fiber_name);
    if (w.contains("phi")) {
      if (!w.at("phi").is_string()) schema_error("$.warped.phi", "expected a string");
      ref.phi_field = w.at("phi").get<std::string>();
    }
    sc.warped = std::move(ref);
  } else {
    const json& chart = need(j, "chart", "$");
    sc.coordinates = string_list(need(chart, "coordinates", "$.chart"),
                                 "$.chart.coordinates");
    if (chart.contains("constraints"))
      sc.constraints = string_list(chart.at("constraints"), "$.chart.constraints");
    const json& metric = need(j, "metric", "$");
    if (!metric.is_array()) schema_error("$.metric", "expected an array of rows");
    std::size_t n = sc.coordinates.size();
    if (metric.size() != n)
      schema_error("$.metric", "expected one row per coordinate");
    for (std::size_t i = 0; i < n; ++i) {
      std::string rp = "$.metric[" + std::to_string(i) + "]";
      std::vector<std::string> row = string_list(metric[i], rp);
      if (row.size() != n - i)
        schema_error(rp, "row " + std::to_string(i) + " must list the " +
                             std::to_string(n - i) + " upper-triangle entries");
      sc.metric.push_back(std::move(row));
    }
  }

  if (j.contains("fields")) {
    const json& f = j.at("fields");
    if (!f.is_object()) schema_error("$.fields", "expected an object");
    for (auto it = f.begin(); it != f.end(); ++it) {
      if (!it.value().is_string())
        schema_error("$.fields." + it.key(), "expected an expression string");
      sc.fields[it.key()] = it.value().get<std::string>();
    }
  }
  if (j.contains("vector_fields")) {
    const json& vf = j.at("vector_fields");
    if (!vf.is_object()) schema_error("$.vector_fields", "expected an object");
    for (auto it = vf.begin(); it != vf.end(); ++it)
      sc.vector_fields[it.key()] =
          string_list(it.value(), "$.vector_fields." + it.key());
  }

  const json& s = need(j, "sampling", "$");
  const json& seed = need(s, "seed", "$.sampling");
  if (!seed.is_number_unsigned() &&
      !(seed.is_number_integer() && seed.get<std::int64_t>() >= 0))
    schema_error("$.sampling.seed", "expected an unsigned integer");
  sc.sampling.seed = seed.get<std::uint64_t>();
  if (s.contains("count")) {
    if (!s.at("count").is_number_integer())
      schema_error("$.sampling.count", "expected an integer");
    sc.sampling.count = s.at("count").get<int>();
  }
  if (sc.sampling.count < 1) schema_error("$.sampling.count", "must be positive");
  const json& box = need(s, "box", "$.sampling");
  if (!box.is_array()) schema_error("$.sampling.box", "expected an array of [lo,hi]");
  for (std::size_t i = 0; i < box.size(); ++i) {
    std::string bp = "$.sampling.box[" + std::to_string(i) + "]";
    if (!box[i].is_array() || box[i].size() != 2 || !box[i][0].is_number() ||
        !box[i][1].is_number())
      schema_error(bp, "expected [lo,hi]");
    double lo = box[i][0].get<double>(), hi = box[i][1].get<double>();
    if (!(lo < hi)) schema_error(bp, "lower bound must be below upper bound");
    sc.sampling.box.push_back({lo, hi});
  }

  if (j.contains("checks")) {
    const json& checks = j.at("checks");
    if (!checks.is_array()) schema_error("$.checks", "expected an array");
    for (std::size_t i = 0; i < checks.size(); ++i) {
      std::string cp = "$.checks[" + std::to_string(i) + "]";
      CheckSpec spec;
      if (checks[i].is_string()) {
        spec.id = checks[i].get<std::string>();
      } else if (checks[i].is_object()) {
        spec.id = need_string(checks[i], "id", cp);
        if (checks[i].contains("tol")) {
          if (!checks[i].at("tol").is_number())
            schema_error(cp + ".tol", "expected a number");
          spec.tol = checks[i].at("tol").get<double>();
        }
      } else {
        schema_error(cp, "expected a check id or {id, tol}");
      }
      sc.checks.push_back(std::move(spec));
    }
  }

  if (j.contains("torus")) {
    const json& t = j.at("torus");
    Torus torus;
    const json& periods = need(t, "periods", "$.torus");
    if (!periods.is_array()) schema_error("$.torus.periods", "expected an array");
    for (const auto& p : periods) torus.periods.push_back(p.get<double>());
    if (t.contains("resolution")) torus.resolution = t.at("resolution").get<int>();
    sc.torus = std::move(torus);
  }
  return sc;
}

ordered_json Scenario::to_json() const {
  ordered_json j;
  j["name"] = name;
  if (warped) {
    ordered_json w;
    w["base"] = warped->base_inline ? ordered_json(warped->base_inline->to_json())
                                    : ordered_json(warped->base_name);
    w["fiber"] = warped->fiber_inline
                     ? ordered_json(warped->fiber_inline->to_json())
                     : ordered_json(warped->fiber_name);
    w["phi"] = warped->phi_field;
    j["warped"] = std::move(w);
  } else {
    j["chart"]["coordinates"] = coordinates;
    if (!constraints.empty()) j["chart"]["constraints"] = constraints;
    j["metric"] = metric;
  }
  if (!fields.empty()) j["fields"] = fields;
  if (!vector_fields.empty()) j["vector_fields"] = vector_fields;
  j["sampling"]["seed"] = sampling.seed;
  j["sampling"]["count"] = sampling.count;
  j["sampling"]["box"] = sampling.box;
  if (!checks.empty()) {
    ordered_json arr = ordered_json::array();
    for (const CheckSpec& c : checks) {
      ordered_json e;
      e["id"] = c.id;
      if (c.tol) e["tol"] = *c.tol;
      arr.push_back(std::move(e));
    }
    j["checks"] = std::move(arr);
  }
  if (torus) {
    j["torus"]["periods"] = torus->periods;
    j["torus"]["resolution"] = torus->resolution;
  }
  return j;
}

Scenario Scenario::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open scenario file '" + path + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw InputError("scenario '" + path + "': parse error at byte " +
                     std::to_string(e.byte) + ": " + e.what());
  }
  return from_json(j);
}

Chart Scenario::chart() const {
  if (warped) return warped_product().product.chart();
  return Chart::make(coordinates, constraints);
}

MetricPatch Scenario::metric_patch() const {
  if (warped) return warped_product().product;
  Chart ch = Chart::make(coordinates, constraints);
  int n = ch.dim();
  std::vector<std::vector<std::string>> full(n, std::vector<std::string>(n));
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < n - i; ++k) full[i][i + k] = metric[i][k];
  return MetricPatch::make(ch, full);
}

Scenario Scenario::base_scenario() const {
  if (!warped) throw InputError("scenario '" + name + "' is not a warped product");
  return warped->base_inline ? *warped->base_inline : builtin(warped->base_name);
}

Scenario Scenario::fiber_scenario() const {
  if (!warped) throw InputError("scenario '" + name + "' is not a warped product");
  return warped->fiber_inline ? *warped->fiber_inline : builtin(warped->fiber_name);
}

WarpedProduct Scenario::warped_product() const {
  Scenario base = base_scenario();
  Scenario fiber = fiber_scenario();
  if (base.is_warped() || fiber.is_warped())
    throw InputError("nested warped products are not supported");
  MetricPatch gb = base.metric_patch();
  MetricPatch gf = fiber.metric_patch();
  auto it = fields.find(warped->phi_field);
  if (it == fields.end())
    throw InputError("warped scenario '" + name + "' lacks the warping field '" +
                     warped->phi_field + "'");
  ScalarField phi = ScalarField::make(gb.chart(), it->second);
  // Positivity gate over a deterministic draw from the base box.
  Scenario::Sampling probe = base.sampling;
  probe.count = std::min(probe.count, 16);
  std::vector<std::vector<double>> samples =
      sample_points(gb.chart(), probe, probe.seed, probe.count);
  return build_warped(gb, gf, phi, samples);
}

PeriodicChart Scenario::periodic_chart() const {
  if (!torus) throw InputError("scenario '" + name + "' has no torus block");
  if (torus->periods.size() != coordinates.size())
    throw InputError("torus periods must match the chart dimension");
  return PeriodicChart::make(coordinates, torus->periods, torus->resolution);
}

ScalarField Scenario::field(const std::string& key) const {
  auto it = fields.find(key);
  if (it == fields.end())
    throw InputError("scenario '" + name + "' has no field '" + key + "'");
  return ScalarField::make(chart(), it->second);
}

ScalarField Scenario::field_or(const std::string& key, double fallback) const {
  auto it = fields.find(key);
  Chart ch = chart();
  if (it == fields.end())
    return ScalarField{ch, Expr::literal(fallback).bind(ch.names())};
  return ScalarField::make(ch, it->second);
}

VectorField Scenario::vector_field(const std::string& key) const {
  auto it = vector_fields.find(key);
  if (it == vector_fields.end())
    throw InputError("scenario '" + name + "' has no vector field '" + key + "'");
  return VectorField::make(chart(), it->second);
}

std::vector<std::vector<double>> sample_points(const Chart& chart,
                                               const Scenario::Sampling& s,
                                               std::optional<std::uint64_t> seed_override,
                                               int count_override) {
  int dim = chart.dim();
  if (static_cast<int>(s.box.size()) != dim)
    throw InputError("sampling box must have one [lo,hi] pair per coordinate");
  int count = count_override > 0 ? count_override : s.count;
  std::mt19937_64 rng(seed_override.value_or(s.seed));
  auto uniform = [&rng] {
    return static_cast<double>(rng() >> 11) * 0x1p-53;
  };
  std::vector<std::vector<double>> pts;
  pts.reserve(count);
  long budget = 10L * count;
  std::vector<double> p(dim);
  while (static_cast<int>(pts.size()) < count && budget-- > 0) {
    for (int k = 0; k < dim; ++k)
      p[k] = s.box[k][0] + uniform() * (s.box[k][1] - s.box[k][0]);
    if (chart.admissible(p)) pts.push_back(p);
  }
  if (static_cast<int>(pts.size()) < count)
    throw InputError(
        "domain-sampling exhaustion: box produced too few admissible points");
  return pts;
}

namespace {

Scenario make_euclidean(int n) {
  Scenario sc;
  sc.name = "euclidean-" + std::to_string(n);
  for (int i = 0; i < n; ++i) sc.coordinates.push_back("x" + std::to_string(i));
  for (int i = 0; i < n; ++i) {
    std::vector<std::string> row;
    for (int j = i; j < n; ++j) row.push_back(i == j ? "1" : "0");
    sc.metric.push_back(std::move(row));
  }
  sc.fields["scal_expected"] = "0";
  sc.sampling.seed = 101;
  for (int i = 0; i < n; ++i) sc.sampling.box.push_back({-2.0, 2.0});
  sc.checks = {{"scal-expected", {}}};
  return sc;
}

Scenario make_round_sphere(int m) {
  Scenario sc;
  sc.name = "round-sphere-" + std::to_string(m);
  static const char* names[] = {"u", "v", "w", "r", "s"};
  std::ostringstream norm;
  norm << "1";
  for (int i = 0; i < m; ++i) {
    sc.coordinates.push_back(names[i]);
    norm << "+" << names[i] << "^2";
  }
  std::string conf = "4/(" + norm.str() + ")^2";
  for (int i = 0; i < m; ++i) {
    std::vector<std::string> row;
    for (int j = i; j < m; ++j) row.push_back(i == j ? conf : "0");
    sc.metric.push_back(std::move(row));
  }
  sc.fields["scal_expected"] = std::to_string(m * (m - 1));
  sc.sampling.seed = 404;
  for (int i = 0; i < m; ++i) sc.sampling.box.push_back({-1.2, 1.2});
  sc.checks = {{"scal-expected", {}}};
  return sc;
}

Scenario make_gaussian() {
  Scenario sc;
  sc.name = "gaussian-soliton";
  sc.coordinates = {"x", "y", "z"};
  sc.metric = {{"1", "0", "0"}, {"1", "0"}, {"1"}};
  sc.fields = {{"f", "(x^2+y^2+z^2)/2"},
               {"lambda", "-1"},
               {"mu", "0"},
               {"scal_expected", "0"}};
  sc.sampling.seed = 202;
  sc.sampling.box = {{-2.0, 2.0}, {-2.0, 2.0}, {-2.0, 2.0}};
  sc.checks = {{"scal-expected", {}},
               {"gradient-soliton-residual", {}},
               {"soliton-residual", {}},
               {"nabla-xi-residual", {}},
               {"generalized-geodesic", {}},
               {"trace-identity", {}},
               {"pairing-identity", {}},
               {"lambda-quadratic", {}},
               {"bochner", {}},
               {"ricci-contraction", {}},
               {"classify", {}},
               {"maximum-principle", {}},
               {"fit-constants", {}}};
  return sc;
}

Scenario make_hyperbolic(const std::string& name, std::uint64_t seed) {
  Scenario sc;
  sc.name = name;
  sc.coordinates = {"x", "y", "z"};
  sc.constraints = {"z"};
  sc.metric = {{"z^(-2)", "0", "0"}, {"z^(-2)", "0"}, {"z^(-2)"}};
  sc.fields = {{"f", "-ln(z)"},      {"lambda", "-7"},
               {"mu", "1"},          {"lambda_audit", "-8"},
               {"mu_audit", "2"},    {"scal_expected", "-6"}};
  sc.sampling.seed = seed;
  sc.sampling.box = {{-1.5, 1.5}, {-1.5, 1.5}, {0.3, 2.5}};
  sc.checks = {{"scal-expected", {}},
               {"gradient-soliton-residual", {}},
               {"soliton-residual", {}},
               {"nabla-xi-residual", {}},
               {"generalized-geodesic", {}},
               {"trace-identity", {}},
               {"pairing-identity", {}},
               {"lambda-quadratic", {}},
               {"bochner", {}},
               {"ricci-contraction", {}},
               {"classify", {}},
               {"grad-scal-alignment", {}},
               {"theorem2-hypotheses", {}},
               {"fit-constants", {}},
               {"paper-constants-audit", {}}};
  return sc;
}

Scenario make_cylinder() {
  Scenario sc;
  sc.name = "paper-example-cylinder";
  Scenario::WarpedRef ref;
  ref.base_name = "hyperbolic-halfspace";
  ref.fiber_name = "round-sphere-3";
  ref.phi_field = "phi";
  sc.warped = std::move(ref);
  sc.fields = {{"phi", "1"},
               {"f", "-ln(z)"},
               {"lambda_audit", "-2"},
               {"mu_audit", "2"}};
  sc.sampling.seed = 606;
  sc.sampling.count = 16;
  sc.sampling.box = {{-1.5, 1.5}, {-1.5, 1.5}, {0.3, 2.5},
                     {-1.2, 1.2}, {-1.2, 1.2}, {-1.2, 1.2}};
  sc.checks = {{"warped-scal-crosscheck", {}},
               {"lift-identities", {}},
               {"paper-constants-audit", {}},
               {"fit-constants", {}}};
  return sc;
}

Scenario make_line_witness() {
  Scenario sc;
  sc.name = "line-exp-warped-witness";
  Scenario::WarpedRef ref;
  auto base = std::make_shared<Scenario>();
  base->name = "line-1";
  base->coordinates = {"t"};
  base->metric = {{"1"}};
  base->sampling.seed = 700;
  base->sampling.count = 16;
  base->sampling.box = {{-1.0, 1.0}};
  ref.base_inline = std::move(base);
  ref.fiber_name = "round-sphere-2";
  ref.phi_field = "phi";
  sc.warped = std::move(ref);
  sc.fields = {{"phi", "exp(t)"},
               {"f", "t"},
               {"mu", "1"},
               {"lambda", "2*exp(-2*t)-7"},
               {"scal_expected", "2*exp(-2*t)-6"}};
  sc.sampling.seed = 707;
  sc.sampling.count = 16;
  sc.sampling.box = {{-1.0, 1.0}, {-1.2, 1.2}, {-1.2, 1.2}};
  sc.checks = {{"scal-expected", {}},
               {"warped-scal-crosscheck", {}},
               {"lift-identities", {}},
               {"e36", {}},
               {"theorem3", {}},
               {"rrr", {}},
               {"e40-identity", {}},
               {"section33-consequences", {}}};
  return sc;
}

Scenario make_flat_torus() {
  Scenario sc;
  sc.name = "flat-torus-2";
  sc.coordinates = {"x", "y"};
  sc.metric = {{"1", "0"}, {"1"}};
  sc.fields = {{"f", "sin(x)+cos(2*y)"}, {"mu", "1"}, {"phi", "1"}};
  sc.sampling.seed = 808;
  sc.sampling.box = {{0.0, 6.283185307179586}, {0.0, 6.283185307179586}};
  sc.torus = Scenario::Torus{{6.283185307179586, 6.283185307179586}, 64};
  sc.checks = {{"laplacian-integral-zero", {}},
               {"integral-ibp", {}},
               {"integral-traceless", {}},
               {"e56-audit", {}},
               {"e40-identity", {}}};
  return sc;
}

Scenario make_torus_section33() {
  Scenario sc;
  sc.name = "torus-section33";
  sc.coordinates = {"x", "y"};
  sc.metric = {{"exp(0.3*sin(x))", "0"}, {"exp(0.3*sin(x))"}};
  sc.fields = {{"f", "sin(x)+cos(y)"}, {"mu", "0.5"}, {"phi", "2+cos(x)"}};
  sc.sampling.seed = 909;
  sc.sampling.box = {{0.0, 6.283185307179586}, {0.0, 6.283185307179586}};
  sc.torus = Scenario::Torus{{6.283185307179586, 6.283185307179586}, 64};
  sc.checks = {{"e40-identity", {}},
               {"section33-consequences", {}},
               {"laplacian-integral-zero", {}},
               {"integral-ibp", {}},
               {"integral-traceless", {}},
               {"e56-audit", {}}};
  return sc;
}

}  // namespace

std::vector<std::string> builtin_names() {
  return {"euclidean-3",
          "gaussian-soliton",
          "hyperbolic-halfspace",
          "round-sphere-3",
          "paper-example-hyperbolic",
          "paper-example-cylinder",
          "line-exp-warped-witness",
          "flat-torus-2",
          "torus-section33"};
}

Scenario builtin(const std::string& name) {
  if (name.rfind("euclidean-", 0) == 0) {
    int n = std::atoi(name.c_str() + 10);
    if (n >= 1 && n <= 6) return make_euclidean(n);
  }
  if (name.rfind("round-sphere-", 0) == 0) {
    int m = std::atoi(name.c_str() + 13);
    if (m >= 2 && m <= 5) return make_round_sphere(m);
  }
  if (name == "gaussian-soliton") return make_gaussian();
  if (name == "hyperbolic-halfspace") return make_hyperbolic("hyperbolic-halfspace", 303);
  if (name == "paper-example-hyperbolic")
    return make_hyperbolic("paper-example-hyperbolic", 505);
  if (name == "paper-example-cylinder") return make_cylinder();
  if (name == "line-exp-warped-witness") return make_line_witness();
  if (name == "flat-torus-2") return make_flat_torus();
  if (name == "torus-section33") return make_torus_section33();
  std::ostringstream os;
  os << "unknown builtin '" << name << "'; available:";
  for (const std::string& n : builtin_names()) os << " " << n;
  os << " (euclidean-<1..6> and round-sphere-<2..5> are parametrized)";
  throw InputError(os.str());
}

}  // namespace qys

#include "qys/checks.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>

#include "qys/soliton.hpp"

namespace qys {

namespace {

using nlohmann::ordered_json;

struct RegistryEntry {
  bool asserted;
  double tol;
};

const std::map<std::string, RegistryEntry>& registry() {
  static const std::map<std::string, RegistryEntry> r = {
      {"scal-expected", {true, 1e-8}},
      {"gradient-soliton-residual", {true, 1e-8}},
      {"soliton-residual", {true, 1e-8}},
      {"nabla-xi-residual", {true, 1e-8}},
      {"generalized-geodesic", {true, 1e-8}},
      {"trace-identity", {true, 1e-8}},
      {"pairing-identity", {true, 1e-8}},
      {"lambda-quadratic", {true, 1e-7}},
      {"bochner", {true, 1e-8}},
      {"ricci-contraction", {true, 1e-8}},
      {"classify", {false, 1e-8}},
      {"maximum-principle", {false, 1e-8}},
      {"grad-scal-alignment", {false, 1e-8}},
      {"theorem2-hypotheses", {false, 1e-8}},
      {"fit-constants", {false, 1e-8}},
      {"paper-constants-audit", {false, 1e-8}},
      {"e36", {true, 1e-8}},
      {"theorem3", {true, 1e-8}},
      {"warped-scal-crosscheck", {true, 1e-7}},
      {"lift-identities", {true, 1e-8}},
      {"rrr", {false, 1e-8}},
      {"e40-identity", {true, 1e-8}},
      {"section33-consequences", {false, 1e-8}},
      {"laplacian-integral-zero", {true, 1e-10}},
      {"integral-ibp", {true, 1e-7}},
      {"integral-traceless", {true, 1e-7}},
      {"e56-audit", {false, 1e-7}},
  };
  return r;
}

double jetmat_max(const JetMat& m) {
  double w = 0.0;
  for (const auto& row : m)
    for (const auto& e : row) w = std::max(w, std::abs(e.value()));
  return w;
}

double jetvec_max(const JetVec& v) {
  double w = 0.0;
  for (const auto& e : v) w = std::max(w, std::abs(e.value()));
  return w;
}

// Everything a check runner might need, built once per scenario run.
struct Ctx {
  const Scenario& sc;
  const CheckOptions& opts;
  std::uint64_t seed;
  int points;

  std::optional<WarpedProduct> wp;
  MetricPatch g;                           // scenario metric (product if warped)
  std::vector<std::vector<double>> pts;    // samples on the scenario chart

  // "Base side": the base factor for warped scenarios, the scenario itself
  // otherwise. Hosts the compatibility-condition checks.
  MetricPatch base_g;
  std::vector<std::vector<double>> base_pts;
  std::vector<std::vector<double>> fiber_pts;  // warped scenarios only

  std::optional<SolitonInstance> inst;

  int order(int min_needed) const { return std::max(opts.jet_order, min_needed); }

  explicit Ctx(const Scenario& s, const CheckOptions& o) : sc(s), opts(o) {
    seed = o.seed.value_or(s.sampling.seed);
    if (s.is_warped()) {
      wp = s.warped_product();
      g = wp->product;
      Scenario base = s.base_scenario();
      base_g = base.metric_patch();
      Scenario::Sampling bs = base.sampling;
      if (o.points > 0) bs.count = o.points;
      base_pts = sample_points(base_g.chart(), bs, o.seed, -1);
      Scenario fiber = s.fiber_scenario();
      Scenario::Sampling fs = fiber.sampling;
      if (o.points > 0) fs.count = o.points;
      fiber_pts = sample_points(fiber.metric_patch().chart(), fs, o.seed, -1);
    } else {
      g = s.metric_patch();
      base_g = g;
    }
    pts = sample_points(g.chart(), s.sampling, o.seed, o.points);
    points = static_cast<int>(pts.size());
    if (!s.is_warped()) base_pts = pts;

    if (s.has_field("f")) {
      inst = SolitonInstance::gradient_type(g, self_field("f"),
                                            self_field_or("lambda", 0.0),
                                            self_field_or("mu", 0.0));
    } else if (s.vector_fields.count("xi")) {
      inst = SolitonInstance::vector_type(g, VectorField::make(g.chart(),
                                                               s.vector_fields.at("xi")),
                                          self_field_or("lambda", 0.0),
                                          self_field_or("mu", 0.0));
    }
  }

  ScalarField self_field(const std::string& key) const {
    auto it = sc.fields.find(key);
    if (it == sc.fields.end())
      throw InputError("scenario '" + sc.name + "' lacks the field '" + key + "'");
    return ScalarField::make(g.chart(), it->second);
  }
  ScalarField self_field_or(const std::string& key, double v) const {
    auto it = sc.fields.find(key);
    if (it == sc.fields.end())
      return ScalarField{g.chart(), Expr::literal(v).bind(g.chart().names())};
    return ScalarField::make(g.chart(), it->second);
  }
  ScalarField base_field(const std::string& key) const {
    auto it = sc.fields.find(key);
    if (it == sc.fields.end())
      throw InputError("scenario '" + sc.name + "' lacks the field '" + key + "'");
    return ScalarField::make(base_g.chart(), it->second);
  }
  ScalarField base_field_or(const std::string& key, double v) const {
    auto it = sc.fields.find(key);
    if (it == sc.fields.end())
      return ScalarField{base_g.chart(), Expr::literal(v).bind(base_g.chart().names())};
    return ScalarField::make(base_g.chart(), it->second);
  }
  const SolitonInstance& soliton() const {
    if (!inst)
      throw InputError("scenario '" + sc.name +
                       "' defines neither a potential f nor a vector field xi");
    return *inst;
  }
  double constant_field_value(const std::string& key) const {
    ScalarField fld = self_field(key);
    double v0 = fld.expr.eval(pts.front());
    for (const auto& p : pts) {
      if (std::abs(fld.expr.eval(p) - v0) > 1e-12 * (1.0 + std::abs(v0)))
        throw InputError("field '" + key + "' must be constant for this check");
    }
    return v0;
  }
};

void finish(CheckRecord& rec) {
  rec.max = 0.0;
  double sum = 0.0;
  for (double r : rec.residuals) {
    rec.max = std::max(rec.max, std::abs(r));
    sum += std::abs(r);
  }
  rec.mean = rec.residuals.empty() ? 0.0 : sum / rec.residuals.size();
  if (rec.asserted)
    rec.verdict = rec.max <= rec.tolerance ? "pass" : "fail";
  else
    rec.verdict = "report-only";
}

void run_scal_expected(const Ctx& ctx, CheckRecord& rec) {
  ScalarField expected = ctx.self_field("scal_expected");
  for (const auto& p : ctx.pts) {
    MetricFrame fr(ctx.g, p, ctx.order(2));
    rec.residuals.push_back(fr.scalar_curvature().value() -
                            expected.expr.eval(p));
  }
}

void run_soliton_pointwise(const Ctx& ctx, CheckRecord& rec) {
  int order = ctx.order(4);
  for (const auto& p : ctx.pts) {
    SolitonPoint sp(ctx.soliton(), p, order);
    double r = 0.0;
    if (rec.id == "gradient-soliton-residual")
      r = jetmat_max(sp.gradient_soliton_residual());
    else if (rec.id == "soliton-residual")
      r = jetmat_max(sp.soliton_residual());
    else if (rec.id == "nabla-xi-residual")
      r = jetmat_max(sp.nabla_xi_residual());
    else if (rec.id == "generalized-geodesic")
      r = jetvec_max(sp.generalized_geodesic_residual());
    else if (rec.id == "trace-identity")
      r = sp.trace_identity_residual().value();
    else if (rec.id == "pairing-identity")
      r = sp.pairing_identity_residual().value();
    else if (rec.id == "lambda-quadratic")
      r = sp.lambda_quadratic_residual().value();
    else if (rec.id == "bochner")
      r = sp.bochner_residual().value();
    rec.residuals.push_back(r);
  }
}

void run_ricci_contraction(const Ctx& ctx, CheckRecord& rec) {
  for (const auto& p : ctx.pts) {
    SolitonPoint sp(ctx.soliton(), p, ctx.order(4));
    auto audit = sp.ricci_contraction_audit();
    rec.residuals.push_back(
        std::max(audit.res_nn.max_abs(), std::abs(audit.res_j)));
  }
}

void run_classify(const Ctx& ctx, CheckRecord& rec) {
  int torse = 0, conc = 0;
  for (const auto& p : ctx.pts) {
    SolitonPoint sp(ctx.soliton(), p, ctx.order(2));
    auto c = sp.classify(rec.tolerance);
    torse += c.torse_forming;
    conc += c.concircular;
    rec.residuals.push_back(0.0);
  }
  rec.details["torse_forming_points"] = torse;
  rec.details["concircular_points"] = conc;
  rec.details["points"] = static_cast<int>(ctx.pts.size());
}

void run_maximum_principle(const Ctx& ctx, CheckRecord& rec) {
  SolitonPoint probe(ctx.soliton(), ctx.pts.front(), ctx.order(4));
  if (std::abs(probe.mu().value()) > rec.tolerance) {
    rec.details["skipped"] = "maximum principle check requires mu = 0";
    return;
  }
  bool all_hyp = true;
  double min_lap = 0.0;
  bool first = true;
  for (const auto& p : ctx.pts) {
    SolitonPoint sp(ctx.soliton(), p, ctx.order(4));
    auto r = sp.maximum_principle(rec.tolerance);
    all_hyp = all_hyp && r.hypothesis_holds;
    if (first || r.lap_xi2 < min_lap) min_lap = r.lap_xi2;
    first = false;
    // Residual: violation magnitude of the sign bound when the curvature
    // hypothesis holds at the point.
    rec.residuals.push_back(
        r.hypothesis_holds ? std::max(0.0, -r.lap_xi2) : 0.0);
  }
  rec.details["hypothesis_holds_everywhere"] = all_hyp;
  rec.details["min_lap_xi2"] = min_lap;
}

void run_grad_scal_alignment(const Ctx& ctx, CheckRecord& rec) {
  int skipped = 0;
  double h0 = 0.0;
  bool have_h = false;
  for (const auto& p : ctx.pts) {
    SolitonPoint sp(ctx.soliton(), p, ctx.order(4));
    try {
      auto a = sp.grad_scal_alignment();
      rec.residuals.push_back(a.residual.max_abs());
      if (!have_h) {
        h0 = a.h;
        have_h = true;
      }
    } catch (const InputError&) {
      ++skipped;  // xi vanishes at this sample
    }
  }
  if (skipped) rec.details["skipped_points"] = skipped;
  if (have_h) rec.details["h_at_first_point"] = h0;
}

void run_theorem2(const Ctx& ctx, CheckRecord& rec) {
  Theorem2Report rep = theorem2_check(ctx.soliton(), ctx.pts, ctx.order(4));
  rec.residuals = {rep.max_unit_xi_dev, rep.max_xi_xi_scal,
                   rep.max_hess_scal_xi_xi, rep.max_hess_identity_res,
                   rep.scal_spread};
  rec.details["max_unit_xi_dev"] = rep.max_unit_xi_dev;
  rec.details["max_xi_xi_scal"] = rep.max_xi_xi_scal;
  rec.details["max_hess_scal_xi_xi"] = rep.max_hess_scal_xi_xi;
  rec.details["max_hess_identity_res"] = rep.max_hess_identity_res;
  rec.details["scal_spread"] = rep.scal_spread;
  rec.details["hypotheses_hold"] = rep.hypotheses_hold(rec.tolerance);
}

void run_fit_constants(const Ctx& ctx, CheckRecord& rec) {
  FitResult fit =
      fit_constants(ctx.g, ctx.self_field("f"), ctx.pts, ctx.order(2));
  rec.residuals = {fit.max_residual};
  rec.details["lambda"] = fit.lambda;
  rec.details["mu"] = fit.mu;
  rec.details["identifiable"] = fit.identifiable;
  rec.details["mu_identifiable"] = fit.mu_identifiable;
}

void run_paper_constants_audit(const Ctx& ctx, CheckRecord& rec) {
  ScalarField lam = ctx.self_field("lambda_audit");
  ScalarField mu = ctx.self_field("mu_audit");
  double lam_v = lam.expr.eval(ctx.pts.front());
  double mu_v = mu.expr.eval(ctx.pts.front());
  double r = residual_under_constants(ctx.g, ctx.self_field("f"), lam_v, mu_v,
                                      ctx.pts, ctx.order(2));
  rec.residuals = {r};
  rec.details["lambda_audited"] = lam_v;
  rec.details["mu_audited"] = mu_v;
}

void run_e36(const Ctx& ctx, CheckRecord& rec) {
  ScalarField f = ctx.base_field("f");
  ScalarField mu = ctx.base_field_or("mu", 0.0);
  ScalarField phi = ctx.base_field_or("phi", 1.0);
  for (const auto& p : ctx.base_pts)
    rec.residuals.push_back(condition_e36_residual(ctx.base_g, f, mu, phi, p));
}

void run_theorem3(const Ctx& ctx, CheckRecord& rec) {
  if (!ctx.wp)
    throw InputError("check 'theorem3' needs a warped scenario");
  try {
    Theorem3Report rep = theorem3_verify(
        *ctx.wp, ctx.base_field("f"), ctx.base_field("lambda"),
        ctx.base_field_or("mu", 0.0), ctx.base_pts, ctx.fiber_pts,
        rec.tolerance);
    rec.residuals = {rep.base_residual_max, rep.product_residual_max,
                     rep.e36_max,           rep.fiber_scal_spread,
                     rep.reduction_max,     rep.fiber_hessian_max,
                     rep.mixed_block_max};
    rec.details["base_residual_max"] = rep.base_residual_max;
    rec.details["product_residual_max"] = rep.product_residual_max;
    rec.details["e36_max"] = rep.e36_max;
    rec.details["fiber_scal_spread"] = rep.fiber_scal_spread;
    rec.details["reduction_max"] = rep.reduction_max;
    rec.details["fiber_hessian_max"] = rep.fiber_hessian_max;
    rec.details["mixed_block_max"] = rep.mixed_block_max;
  } catch (const InputError& e) {
    rec.residuals = {std::numeric_limits<double>::infinity()};
    rec.details["error"] = e.what();
  }
}

void run_warped_scal_crosscheck(const Ctx& ctx, CheckRecord& rec) {
  if (!ctx.wp)
    throw InputError("check 'warped-scal-crosscheck' needs a warped scenario");
  for (const auto& p : ctx.pts) {
    double scal = scalar_curvature(ctx.wp->product, p);
    rec.residuals.push_back(warped_scal_crosscheck(*ctx.wp, p) /
                            (1.0 + std::abs(scal)));
  }
}

void run_lift_identities(const Ctx& ctx, CheckRecord& rec) {
  if (!ctx.wp)
    throw InputError("check 'lift-identities' needs a warped scenario");
  LiftReport rep = lift_checks(*ctx.wp, ctx.base_field("f"), ctx.pts);
  rec.residuals = {rep.grad_fiber_max, rep.grad_base_max, rep.hess_base_max,
                   rep.metric_mixed_max};
  rec.details["grad_fiber_max"] = rep.grad_fiber_max;
  rec.details["grad_base_max"] = rep.grad_base_max;
  rec.details["hess_base_max"] = rep.hess_base_max;
  rec.details["metric_mixed_max"] = rep.metric_mixed_max;
}

void run_rrr(const Ctx& ctx, CheckRecord& rec) {
  ScalarField f = ctx.base_field("f");
  ScalarField mu = ctx.base_field_or("mu", 0.0);
  ScalarField phi = ctx.base_field_or("phi", 1.0);
  for (const auto& p : ctx.base_pts)
    rec.residuals.push_back(
        condition_rrr_residual(ctx.base_g, f, mu, phi, p).max_abs());
  RrrAudit audit =
      condition_rrr_audit(ctx.base_g, f, mu, phi, ctx.base_pts.front());
  rec.details["trace_vs_scalar_condition"] = audit.trace_vs_e37;
  rec.details["nabla_xi_formula"] = audit.nabla_xi_formula;
}

void run_section33(const Ctx& ctx, CheckRecord& rec) {
  ScalarField f = ctx.base_field("f");
  ScalarField mu = ctx.base_field_or("mu", 0.0);
  ScalarField phi = ctx.base_field_or("phi", 1.0);
  double rrr_max = 0.0;
  for (const auto& p : ctx.base_pts) {
    Section33Residuals res =
        section33_pointwise_residual(ctx.base_g, f, mu, phi, p);
    if (rec.id == "e40-identity")
      rec.residuals.push_back(res.e40);
    else
      rec.residuals.push_back(std::max(std::abs(res.e38), std::abs(res.e51)));
    rrr_max = std::max(rrr_max, res.rrr_max);
  }
  if (rec.id == "section33-consequences")
    rec.details["rrr_max"] = rrr_max;  // the two identities presuppose this ~ 0
}

void run_torus_checks(const Ctx& ctx, CheckRecord& rec) {
  PeriodicChart pc = ctx.sc.periodic_chart();
  ScalarField f = ctx.self_field("f");
  Expr f_bound = pc.chart.bind(f.expr);
  require_periodic(pc, f_bound);

  if (rec.id == "laplacian-integral-zero") {
    double v = torus_functional(pc, ctx.g, [&](const MetricFrame& fr) {
      return fr.laplacian(fr.eval(f_bound)).value();
    });
    rec.residuals = {v};
    return;
  }

  double mu = ctx.constant_field_value("mu");
  ScalarField phi = ctx.self_field_or("phi", 1.0);
  CompactIntegralReport rep =
      compact_integral_checks(pc, ctx.g, f, mu, phi);
  if (rec.id == "integral-ibp") {
    rec.residuals = {rep.ibp_residual};
  } else if (rec.id == "integral-traceless") {
    rec.residuals = {rep.proposition_residual};
  } else if (rec.id == "e56-audit") {
    rec.residuals = {rep.e56_residual};
    // Trajectory under resolution doubling, centered on the scenario value.
    int r0 = ctx.sc.torus->resolution;
    std::vector<int> resolutions = {r0 / 2, r0, r0 * 2};
    ordered_json traj = ordered_json::array();
    for (int r : resolutions) {
      CompactIntegralReport rr =
          compact_integral_checks(pc.with_resolution(r), ctx.g, f, mu, phi);
      ordered_json e;
      e["resolution"] = r;
      e["e56"] = rr.e56_residual;
      traj.push_back(std::move(e));
    }
    rec.details["trajectory"] = std::move(traj);
    rec.details["er_hess_max"] = rep.er_hess_max;
    rec.details["er_trace_max"] = rep.er_trace_max;
    rec.details["nabla_xi_max"] = rep.nabla_xi_max;
    rec.details["xi4_integral"] = rep.xi4_integral;
  }
}

CheckRecord run_one(const Ctx& ctx, const Scenario::CheckSpec& spec) {
  auto it = registry().find(spec.id);
  if (it == registry().end()) {
    std::ostringstream os;
    os << "unknown check id '" << spec.id << "'; available:";
    for (const auto& [id, entry] : registry()) os << " " << id;
    throw InputError(os.str());
  }
  CheckRecord rec;
  rec.id = spec.id;
  rec.asserted = it->second.asserted || ctx.opts.strict;
  rec.tolerance = ctx.opts.tol.value_or(spec.tol.value_or(it->second.tol));

  if (rec.id == "scal-expected") run_scal_expected(ctx, rec);
  else if (rec.id == "gradient-soliton-residual" || rec.id == "soliton-residual" ||
           rec.id == "nabla-xi-residual" || rec.id == "generalized-geodesic" ||
           rec.id == "trace-identity" || rec.id == "pairing-identity" ||
           rec.id == "lambda-quadratic" || rec.id == "bochner")
    run_soliton_pointwise(ctx, rec);
  else if (rec.id == "ricci-contraction") run_ricci_contraction(ctx, rec);
  else if (rec.id == "classify") run_classify(ctx, rec);
  else if (rec.id == "maximum-principle") run_maximum_principle(ctx, rec);
  else if (rec.id == "grad-scal-alignment") run_grad_scal_alignment(ctx, rec);
  else if (rec.id == "theorem2-hypotheses") run_theorem2(ctx, rec);
  else if (rec.id == "fit-constants") run_fit_constants(ctx, rec);
  else if (rec.id == "paper-constants-audit") run_paper_constants_audit(ctx, rec);
  else if (rec.id == "e36") run_e36(ctx, rec);
  else if (rec.id == "theorem3") run_theorem3(ctx, rec);
  else if (rec.id == "warped-scal-crosscheck") run_warped_scal_crosscheck(ctx, rec);
  else if (rec.id == "lift-identities") run_lift_identities(ctx, rec);
  else if (rec.id == "rrr") run_rrr(ctx, rec);
  else if (rec.id == "e40-identity" || rec.id == "section33-consequences")
    run_section33(ctx, rec);
  else
    run_torus_checks(ctx, rec);

  finish(rec);
  return rec;
}

}  // namespace

bool CheckReport::failed() const {
  for (const CheckRecord& r : records)
    if (r.verdict == "fail") return true;
  return false;
}

ordered_json CheckReport::to_json() const {
  ordered_json j;
  j["scenario"] = scenario;
  j["environment"]["seed"] = seed;
  j["environment"]["jet_order"] = jet_order;
  j["environment"]["points"] = points;
  j["environment"]["tool_version"] = tool_version;
  ordered_json arr = ordered_json::array();
  for (const CheckRecord& r : records) {
    ordered_json e;
    e["id"] = r.id;
    e["tolerance"] = r.tolerance;
    e["max"] = r.max;
    e["mean"] = r.mean;
    e["verdict"] = r.verdict;
    e["residuals"] = r.residuals;
    if (!r.details.empty()) e["details"] = r.details;
    arr.push_back(std::move(e));
  }
  j["checks"] = std::move(arr);
  j["failed"] = failed();
  return j;
}

std::string CheckReport::to_csv() const {
  std::ostringstream os;
  os.precision(17);
  os << "check,point,residual,tolerance,verdict\n";
  for (const CheckRecord& r : records) {
    for (std::size_t i = 0; i < r.residuals.size(); ++i)
      os << r.id << "," << i << "," << r.residuals[i] << "," << r.tolerance
         << "," << r.verdict << "\n";
  }
  return os.str();
}

std::vector<std::string> check_ids() {
  std::vector<std::string> ids;
  for (const auto& [id, entry] : registry()) ids.push_back(id);
  return ids;
}

bool check_is_asserted(const std::string& id) {
  auto it = registry().find(id);
  if (it == registry().end()) throw InputError("unknown check id '" + id + "'");
  return it->second.asserted;
}

double check_default_tol(const std::string& id) {
  auto it = registry().find(id);
  if (it == registry().end()) throw InputError("unknown check id '" + id + "'");
  return it->second.tol;
}

CheckReport run_scenario(const Scenario& sc, const CheckOptions& opts) {
  if (opts.jet_order < 2 || opts.jet_order > 6)
    throw InputError("jet order must lie in 2..6");
  Ctx ctx(sc, opts);
  CheckReport rep;
  rep.scenario = sc.name;
  rep.seed = ctx.seed;
  rep.jet_order = opts.jet_order;
  rep.points = ctx.points;
  for (const Scenario::CheckSpec& spec : sc.checks)
    rep.records.push_back(run_one(ctx, spec));
  std::sort(rep.records.begin(), rep.records.end(),
            [](const CheckRecord& a, const CheckRecord& b) { return a.id < b.id; });
  return rep;
}

}  // namespace qys

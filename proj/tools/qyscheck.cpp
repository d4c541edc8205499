// qyscheck: run residual-check scenarios and emit JSON/CSV reports.
//
// Exit codes: 0 all asserted checks pass, 1 an asserted check failed,
// 2 bad input (unreadable file, malformed JSON, schema or domain errors).

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "qys/checks.hpp"
#include "qys/soliton.hpp"

using namespace qys;

namespace {

Scenario resolve_scenario(const std::string& arg) {
  if (std::filesystem::exists(arg)) return Scenario::load(arg);
  return builtin(arg);
}

void write_report(const CheckReport& rep, const std::string& path,
                  const std::string& format) {
  std::string payload =
      format == "csv" ? rep.to_csv() : rep.to_json().dump(2) + "\n";
  if (path.empty()) {
    std::cout << payload;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write report to '" + path + "'");
  out << payload;
}

void print_summary(const CheckReport& rep) {
  std::fprintf(stderr, "scenario %s: %d points, seed %llu, jet order %d\n",
               rep.scenario.c_str(), rep.points,
               static_cast<unsigned long long>(rep.seed), rep.jet_order);
  for (const CheckRecord& r : rep.records)
    std::fprintf(stderr, "  %-28s %-11s max %.3e  tol %.1e\n", r.id.c_str(),
                 r.verdict.c_str(), r.max, r.tolerance);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Residual checks for chart-based metrics, solitons and warped "
               "products"};
  app.require_subcommand(1);

  std::string scenario_arg, report_path, format = "json";
  CheckOptions opts;
  double tol_flag = -1.0;
  std::int64_t seed_flag = -1;
  bool quiet = false;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("scenario", scenario_arg,
                    "scenario file path or builtin name")
        ->required();
    cmd->add_option("--tol", tol_flag, "override every tolerance");
    cmd->add_option("--points", opts.points, "override the sample count");
    cmd->add_option("--seed", seed_flag, "override the sampling seed");
    cmd->add_option("--jet-order", opts.jet_order, "Taylor order, 2..6");
  };

  CLI::App* check = app.add_subcommand("check", "run the scenario's checks");
  add_common(check);
  check->add_flag("--strict", opts.strict,
                  "treat report-only checks as asserted");
  check->add_option("--report", report_path, "write the report to this path");
  check->add_option("--format", format, "report format")
      ->check(CLI::IsMember({"json", "csv"}));
  check->add_flag("-q,--quiet", quiet, "suppress the per-check summary");

  CLI::App* fit = app.add_subcommand(
      "fit", "fit constant coefficients to the scenario's potential");
  add_common(fit);

  CLI::App* warp = app.add_subcommand(
      "warp", "inspect the warped-product structure of a scenario");
  add_common(warp);

  CLI::App* bi = app.add_subcommand("builtin", "inspect builtin scenarios");
  bool list = false;
  std::string builtin_name;
  bi->add_flag("--list", list, "list builtin scenario names");
  bi->add_option("name", builtin_name, "print a builtin scenario as JSON");

  CLI11_PARSE(app, argc, argv);

  if (tol_flag >= 0) opts.tol = tol_flag;
  if (seed_flag >= 0) opts.seed = static_cast<std::uint64_t>(seed_flag);

  try {
    if (opts.jet_order < 2 || opts.jet_order > 6)
      throw InputError("jet order must lie in 2..6");
    if (bi->parsed()) {
      if (list) {
        for (const std::string& n : builtin_names()) std::cout << n << "\n";
        return 0;
      }
      if (builtin_name.empty())
        throw InputError("builtin: pass a name or --list");
      std::cout << builtin(builtin_name).to_json().dump(2) << "\n";
      return 0;
    }

    Scenario sc = resolve_scenario(scenario_arg);

    if (fit->parsed()) {
      auto pts = sample_points(sc.metric_patch().chart(), sc.sampling,
                               opts.seed, opts.points);
      FitResult r = fit_constants(sc.metric_patch(), sc.field("f"), pts,
                                  std::max(2, opts.jet_order));
      nlohmann::ordered_json j;
      j["scenario"] = sc.name;
      j["lambda"] = r.lambda;
      j["mu"] = r.mu;
      j["max_residual"] = r.max_residual;
      j["identifiable"] = r.identifiable;
      j["mu_identifiable"] = r.mu_identifiable;
      std::cout << j.dump(2) << "\n";
      return 0;
    }

    if (warp->parsed()) {
      if (!sc.is_warped())
        throw InputError("scenario '" + sc.name + "' is not a warped product");
      WarpedProduct wp = sc.warped_product();
      auto pts = sample_points(wp.product.chart(), sc.sampling, opts.seed,
                               opts.points);
      double cross = 0.0;
      for (const auto& p : pts)
        cross = std::max(cross, std::abs(warped_scal_crosscheck(wp, p)));
      nlohmann::ordered_json j;
      j["scenario"] = sc.name;
      j["base_dim"] = wp.base_dim();
      j["fiber_dim"] = wp.fiber_dim();
      j["scal_formula_crosscheck_max"] = cross;
      if (sc.has_field("f")) {
        ScalarField f = ScalarField::make(wp.base.chart(), sc.fields.at("f"));
        LiftReport lift = lift_checks(wp, f, pts);
        j["lift_grad_fiber_max"] = lift.grad_fiber_max;
        j["lift_hess_base_max"] = lift.hess_base_max;
      }
      std::cout << j.dump(2) << "\n";
      return 0;
    }

    CheckReport rep = run_scenario(sc, opts);
    if (!quiet) print_summary(rep);
    write_report(rep, report_path, format);
    return rep.failed() ? 1 : 0;
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
}

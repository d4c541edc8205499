#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "qys/scenario.hpp"

namespace qys {

inline constexpr const char* kToolVersion = "qyscheck 0.1.0";

struct CheckOptions {
  std::optional<double> tol;           // overrides every default tolerance
  std::optional<std::uint64_t> seed;   // overrides the scenario seed
  int points = -1;                     // overrides the sample count
  int jet_order = 4;                   // 2..6; order-hungry checks clamp up
  bool strict = false;                 // report-only checks become asserted
};

struct CheckRecord {
  std::string id;
  double tolerance = 0.0;
  bool asserted = true;
  double max = 0.0;
  double mean = 0.0;
  std::vector<double> residuals;  // per sample point (or per sub-quantity)
  std::string verdict;            // "pass" | "fail" | "report-only"
  nlohmann::ordered_json details = nlohmann::ordered_json::object();
};

struct CheckReport {
  std::string scenario;
  std::uint64_t seed = 0;
  int jet_order = 4;
  int points = 0;
  std::string tool_version = kToolVersion;
  std::vector<CheckRecord> records;  // sorted by check id

  bool failed() const;
  nlohmann::ordered_json to_json() const;
  std::string to_csv() const;
};

/// Registry queries. Identifiers map one-to-one to library operations;
/// whether a check is asserted or report-only is fixed here (audits of
/// externally claimed constants are report-only unless --strict).
std::vector<std::string> check_ids();
bool check_is_asserted(const std::string& id);
double check_default_tol(const std::string& id);

/// Runs every check listed in the scenario over its seeded sample plan.
/// Deterministic: identical inputs give byte-identical serialized reports.
CheckReport run_scenario(const Scenario& sc, const CheckOptions& opts = {});

}  // namespace qys

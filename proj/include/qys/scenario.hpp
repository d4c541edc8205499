#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "qys/geometry.hpp"
#include "qys/warp.hpp"

namespace qys {

/// Declarative description of a manifold-with-data plus the checks to run on
/// it. Serialized as JSON; see Scenario::from_json for the schema.
struct Scenario {
  std::string name;
  std::vector<std::string> coordinates;
  std::vector<std::string> constraints;            // sources, required > 0
  std::vector<std::vector<std::string>> metric;    // upper triangle, row i has n-i entries
  std::map<std::string, std::string> fields;       // f, lambda, mu, phi, ...
  std::map<std::string, std::vector<std::string>> vector_fields;

  struct Sampling {
    std::uint64_t seed = 0;
    int count = 32;
    std::vector<std::array<double, 2>> box;  // per-coordinate [lo, hi]
  };
  Sampling sampling;

  struct CheckSpec {
    std::string id;
    std::optional<double> tol;
  };
  std::vector<CheckSpec> checks;

  /// Warped scenarios assemble their chart and metric from the referenced
  /// base and fiber; references are builtin names or inline scenario objects.
  struct WarpedRef {
    std::shared_ptr<Scenario> base_inline;   // one of the two per reference
    std::string base_name;
    std::shared_ptr<Scenario> fiber_inline;
    std::string fiber_name;
    std::string phi_field = "phi";           // field name in this scenario
  };
  std::optional<WarpedRef> warped;

  struct Torus {
    std::vector<double> periods;
    int resolution = 64;
  };
  std::optional<Torus> torus;

  static Scenario from_json(const nlohmann::json& j);
  nlohmann::ordered_json to_json() const;
  static Scenario load(const std::string& path);

  bool is_warped() const { return warped.has_value(); }
  bool is_torus() const { return torus.has_value(); }

  Chart chart() const;
  MetricPatch metric_patch() const;  // assembles the warped product if needed
  WarpedProduct warped_product() const;
  Scenario base_scenario() const;
  Scenario fiber_scenario() const;
  PeriodicChart periodic_chart() const;

  bool has_field(const std::string& key) const { return fields.count(key) > 0; }
  ScalarField field(const std::string& key) const;
  ScalarField field_or(const std::string& key, double fallback) const;
  VectorField vector_field(const std::string& key) const;
};

std::vector<std::string> builtin_names();
/// Registry lookup; 'euclidean-<n>' and 'round-sphere-<m>' are parametrized.
/// Unknown names raise InputError listing the registry.
Scenario builtin(const std::string& name);

/// Uniform samples over the box, rejecting inadmissible points, with a 10x
/// retry budget. Deterministic for a given seed (mt19937_64, 53-bit doubles).
std::vector<std::vector<double>> sample_points(const Chart& chart,
                                               const Scenario::Sampling& s,
                                               std::optional<std::uint64_t> seed_override = {},
                                               int count_override = -1);

}  // namespace qys

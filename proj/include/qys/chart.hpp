#pragma once

#include <span>
#include <string>
#include <vector>

#include "qys/expr.hpp"
#include "qys/jet.hpp"

namespace qys {

/// A named coordinate system: dimension, coordinate names, and domain
/// constraints (expressions required to be > 0 at admissible points).
class Chart {
 public:
  Chart() = default;
  Chart(std::vector<std::string> coord_names, std::vector<Expr> constraints);

  static Chart make(std::vector<std::string> coord_names,
                    const std::vector<std::string>& constraint_sources = {});

  int dim() const { return static_cast<int>(names_.size()); }
  const std::vector<std::string>& names() const { return names_; }
  const std::vector<Expr>& constraints() const { return constraints_; }

  Expr bind(const Expr& e) const { return e.bind(names_); }

  bool admissible(std::span<const double> p) const;
  /// Throws DomainError naming the violated constraint.
  void require_admissible(std::span<const double> p) const;

 private:
  std::vector<std::string> names_;
  std::vector<Expr> constraints_;  // bound
};

/// Coordinate seed jets at a point: x_i as value p[i] plus unit first-order
/// coefficient, in the shared space of the given order.
std::vector<Jet> seed_jets(std::span<const double> p, int order);

/// Evaluate a chart-bound expression to a jet of the requested order.
Jet eval_jet(const Expr& e, const Chart& chart, std::span<const double> point,
             int order);

}  // namespace qys

#include "qys/chart.hpp"

#include <set>
#include <sstream>

namespace qys {

Chart::Chart(std::vector<std::string> coord_names, std::vector<Expr> constraints)
    : names_(std::move(coord_names)) {
  if (names_.empty()) throw InputError("chart: dimension must be at least 1");
  std::set<std::string> uniq(names_.begin(), names_.end());
  if (uniq.size() != names_.size())
    throw InputError("chart: coordinate names must be distinct");
  constraints_.reserve(constraints.size());
  for (const Expr& c : constraints) constraints_.push_back(c.bind(names_));
}

Chart Chart::make(std::vector<std::string> coord_names,
                  const std::vector<std::string>& constraint_sources) {
  std::vector<Expr> cs;
  cs.reserve(constraint_sources.size());
  for (const std::string& s : constraint_sources) cs.push_back(Expr::parse(s));
  return Chart(std::move(coord_names), std::move(cs));
}

bool Chart::admissible(std::span<const double> p) const {
  if (static_cast<int>(p.size()) != dim()) return false;
  for (const Expr& c : constraints_) {
    try {
      if (c.eval(p) <= 0.0) return false;
    } catch (const DomainError&) {
      return false;
    }
  }
  return true;
}

void Chart::require_admissible(std::span<const double> p) const {
  if (static_cast<int>(p.size()) != dim())
    throw DomainError("point dimension does not match chart dimension");
  for (const Expr& c : constraints_) {
    double v;
    try {
      v = c.eval(p);
    } catch (const DomainError&) {
      v = -1.0;
    }
    if (v <= 0.0) {
      std::ostringstream os;
      os << "point violates domain constraint '" << c.str() << " > 0' at (";
      for (std::size_t i = 0; i < p.size(); ++i) os << (i ? "," : "") << p[i];
      os << ")";
      throw DomainError(os.str());
    }
  }
}

std::vector<Jet> seed_jets(std::span<const double> p, int order) {
  auto space = JetSpace::get(static_cast<int>(p.size()), order);
  std::vector<Jet> seeds;
  seeds.reserve(p.size());
  for (std::size_t i = 0; i < p.size(); ++i)
    seeds.push_back(Jet::variable(space, static_cast<int>(i), p[i]));
  return seeds;
}

Jet eval_jet(const Expr& e, const Chart& chart, std::span<const double> point,
             int order) {
  chart.require_admissible(point);
  Expr bound = e.is_bound() ? e : chart.bind(e);
  return bound.eval(std::span<const Jet>(seed_jets(point, order)));
}

}  // namespace qys

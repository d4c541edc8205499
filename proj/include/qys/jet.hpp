#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <unordered_map>
#include <vector>

#include "qys/errors.hpp"

namespace qys {

/// Exponent vector of a mixed partial, one entry per coordinate.
using MultiIndex = std::vector<int>;

/// Shared bookkeeping for all jets with the same variable count and
/// truncation order: the graded-lex enumeration of multi-indices of total
/// degree <= order and the reverse lookup used by multiplication.
class JetSpace {
 public:
  static std::shared_ptr<const JetSpace> get(int nvars, int order);

  int nvars() const { return nvars_; }
  int order() const { return order_; }
  int size() const { return static_cast<int>(indices_.size()); }

  const MultiIndex& index(int pos) const { return indices_[pos]; }
  int degree(int pos) const { return degrees_[pos]; }
  std::uint64_t key(int pos) const { return keys_[pos]; }

  /// Position of a multi-index, or -1 when its total degree exceeds order.
  int position(const MultiIndex& mi) const;
  int position_of_key(std::uint64_t key) const;

  /// Positions are sorted by total degree; [begin, end) for one degree.
  int degree_begin(int d) const { return degree_offsets_[d]; }
  int degree_end(int d) const { return degree_offsets_[d + 1]; }

 private:
  JetSpace(int nvars, int order);

  int nvars_;
  int order_;
  std::vector<MultiIndex> indices_;
  std::vector<int> degrees_;
  std::vector<std::uint64_t> keys_;
  std::vector<int> degree_offsets_;
  std::unordered_map<std::uint64_t, int> lookup_;
};

/// Truncated multivariate Taylor expansion of a real quantity at a point.
/// Coefficient at multi-index a equals (d^a f / a!); arithmetic propagates
/// them exactly, so jets act as the derivative oracle for everything
/// downstream. Immutable in practice: all operations return new jets.
class Jet {
 public:
  explicit Jet(std::shared_ptr<const JetSpace> space);

  static Jet constant(std::shared_ptr<const JetSpace> space, double v);
  /// Seed jet for coordinate var: value v, unit first-order coefficient.
  static Jet variable(std::shared_ptr<const JetSpace> space, int var, double v);

  const JetSpace& space() const { return *space_; }
  std::shared_ptr<const JetSpace> space_ptr() const { return space_; }
  int nvars() const { return space_->nvars(); }
  int order() const { return space_->order(); }

  double value() const { return c_[0]; }
  /// Taylor coefficient at mi; OrderError when its degree exceeds order.
  double coeff(const MultiIndex& mi) const;
  /// Raw mixed partial: a! times the Taylor coefficient.
  double derivative(const MultiIndex& mi) const;

  std::span<const double> coeffs() const { return c_; }
  double& raw(int pos) { return c_[pos]; }
  double raw(int pos) const { return c_[pos]; }

  Jet truncated(int new_order) const;

  Jet operator-() const;
  friend Jet operator+(const Jet& a, const Jet& b);
  friend Jet operator-(const Jet& a, const Jet& b);
  friend Jet operator*(const Jet& a, const Jet& b);
  friend Jet operator/(const Jet& a, const Jet& b);
  friend Jet operator+(const Jet& a, double s);
  friend Jet operator+(double s, const Jet& a);
  friend Jet operator-(const Jet& a, double s);
  friend Jet operator-(double s, const Jet& a);
  friend Jet operator*(const Jet& a, double s);
  friend Jet operator*(double s, const Jet& a);
  friend Jet operator/(const Jet& a, double s);
  friend Jet operator/(double s, const Jet& a);

 private:
  std::shared_ptr<const JetSpace> space_;
  std::vector<double> c_;

  friend Jet jet_compose(const Jet& u, std::span<const double> series);
  friend Jet jet_partial(const Jet& j, int var);
};

/// f(u) for univariate f given the scaled Taylor series of f at u.value():
/// series[j] = f^(j)(u.value()) / j!.
Jet jet_compose(const Jet& u, std::span<const double> series);

/// Partial derivative with respect to variable var; result order drops by 1.
Jet jet_partial(const Jet& j, int var);

Jet jet_exp(const Jet& u);
Jet jet_ln(const Jet& u);
Jet jet_sqrt(const Jet& u);
Jet jet_sin(const Jet& u);
Jet jet_cos(const Jet& u);
Jet jet_tan(const Jet& u);
Jet jet_sinh(const Jet& u);
Jet jet_cosh(const Jet& u);
Jet jet_tanh(const Jet& u);
Jet jet_reciprocal(const Jet& u);
/// Integer exponents: repeated multiplication, any base. Otherwise lowers
/// to exp(p*ln(u)) and demands u.value() > 0.
Jet jet_pow(const Jet& u, double p);
Jet jet_pow_int(const Jet& u, long long p);

int multi_index_degree(const MultiIndex& mi);
double multi_index_factorial(const MultiIndex& mi);

}  // namespace qys

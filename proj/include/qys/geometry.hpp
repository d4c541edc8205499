#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "qys/chart.hpp"
#include "qys/expr.hpp"
#include "qys/tensor.hpp"

namespace qys {

using JetVec = std::vector<Jet>;
using JetMat = std::vector<JetVec>;
using JetTen3 = std::vector<JetMat>;
using JetTen4 = std::vector<JetTen3>;

/// Metric on a chart: n x n matrix of expressions, symmetric by
/// construction (the lower triangle mirrors the upper one).
class MetricPatch {
 public:
  MetricPatch() = default;
  MetricPatch(Chart chart, std::vector<std::vector<Expr>> components);

  static MetricPatch make(Chart chart,
                          const std::vector<std::vector<std::string>>& sources);

  const Chart& chart() const { return chart_; }
  int dim() const { return chart_.dim(); }
  const Expr& component(int i, int j) const { return comp_[i][j]; }
  const std::vector<std::vector<Expr>>& components() const { return comp_; }

 private:
  Chart chart_;
  std::vector<std::vector<Expr>> comp_;  // full matrix, bound, mirrored
};

struct ScalarField {
  Chart chart;
  Expr expr;
  static ScalarField make(const Chart& chart, const std::string& source);
  static ScalarField make(const Chart& chart, Expr e);
};

struct VectorField {
  Chart chart;
  std::vector<Expr> comp;  // contravariant components
  static VectorField make(const Chart& chart,
                          const std::vector<std::string>& sources);
  static VectorField make(const Chart& chart, std::vector<Expr> comp);
};

using OneForm = VectorField;  // covariant components, same storage

/// All curvature data of a metric at one point, carried as jets so that
/// derived fields (scal, Hessians of derived scalars, divergences of
/// derived tensors) can themselves be differentiated. Each covariant
/// derivative or partial consumed lowers the remaining jet order by one;
/// binary operations align to the lower order automatically.
class MetricFrame {
 public:
  MetricFrame(const MetricPatch& g, std::span<const double> p, int order);

  int dim() const { return n_; }
  int order() const { return order_; }
  const std::vector<double>& point() const { return point_; }
  const JetVec& seeds() const { return seeds_; }

  Jet eval(const Expr& e) const;
  JetVec eval(const std::vector<Expr>& comps) const;

  const JetMat& metric() const { return g_; }
  const JetMat& inverse_metric() const { return ginv_; }
  /// Christoffel symbols, layout gamma()[k][i][j] = Gamma^k_{ij}.
  const JetTen3& christoffel() const { return gamma_; }

  /// Mixed curvature, layout [i][j][l][m]: component m of R(d_i, d_j) d_l.
  JetTen4 riemann_mixed() const;
  /// Lowered so that R[i][j][i][j] = K (g_ii g_jj - g_ij^2) on a space form
  /// of sectional curvature K (negative on hyperbolic space).
  JetTen4 riemann_lowered() const;
  JetMat ricci() const;
  JetMat ricci_operator() const;  // [i][j] = Q^i_j
  Jet scalar_curvature() const;

  // Scalar-field calculus; accepts any derived scalar jet.
  JetVec grad(const Jet& f) const;
  JetVec grad_covector(const Jet& f) const;  // the differential df
  JetMat hessian(const Jet& f) const;
  Jet laplacian(const Jet& f) const;

  // Vector-field calculus on jet-valued components.
  /// nabla_vector(X)[i][j] = (nabla X)^i_j = d_j X^i + Gamma^i_{jk} X^k.
  JetMat nabla_vector(const JetVec& x) const;
  JetVec covariant_acceleration(const JetVec& x) const;  // nabla_X X
  Jet norm2_vector(const JetVec& x) const;               // |X|^2
  Jet norm2_mixed(const JetMat& a) const;                // |A|^2, A a (1,1)
  Jet norm2_bilinear(const JetMat& t) const;             // |T|^2, T a (0,2)
  Jet inner_bilinear(const JetMat& s, const JetMat& t) const;
  JetMat lie_metric(const JetVec& x) const;              // L_X g
  JetVec lower(const JetVec& x) const;
  JetVec raise(const JetVec& w) const;

  Jet div_vector(const JetVec& x) const;
  Jet div_oneform(const JetVec& w) const;
  /// div(T)_j = g^{ik} (nabla_i T)_{kj} for a (0,2) tensor field.
  JetVec div_bilinear(const JetMat& t) const;

  /// Applies X as a derivation: X(f) = X^i d_i f.
  Jet apply_vector(const JetVec& x, const Jet& f) const;

  Jet zero() const;
  Jet constant(double v) const;

 private:
  int n_;
  int order_;
  std::vector<double> point_;
  JetVec seeds_;
  JetMat g_;
  JetMat ginv_;
  JetTen3 dg_;     // dg_[i][j][l] = d_l g_ij
  JetTen3 gamma_;  // [k][i][j]
};

// Pointwise convenience API (spec operation surface): builds a frame and
// extracts degree-0 values.
TensorValue metric_at(const MetricPatch& g, std::span<const double> p);
TensorValue inverse_metric_at(const MetricPatch& g, std::span<const double> p);
TensorValue christoffel(const MetricPatch& g, std::span<const double> p);
TensorValue riemann(const MetricPatch& g, std::span<const double> p);
TensorValue riemann_lowered(const MetricPatch& g, std::span<const double> p);
TensorValue ricci(const MetricPatch& g, std::span<const double> p);
TensorValue ricci_operator(const MetricPatch& g, std::span<const double> p);
double scalar_curvature(const MetricPatch& g, std::span<const double> p);

TensorValue grad(const MetricPatch& g, const ScalarField& f, std::span<const double> p);
TensorValue hessian(const MetricPatch& g, const ScalarField& f, std::span<const double> p);
double laplacian(const MetricPatch& g, const ScalarField& f, std::span<const double> p);

TensorValue lie_derivative_metric(const MetricPatch& g, const VectorField& x,
                                  std::span<const double> p);
TensorValue covariant_derivative_vector(const MetricPatch& g, const VectorField& x,
                                        std::span<const double> p);
/// (|X|^2, |nabla X|^2)
std::pair<double, double> vector_field_norms(const MetricPatch& g, const VectorField& x,
                                             std::span<const double> p);
double divergence_vector(const MetricPatch& g, const VectorField& x,
                         std::span<const double> p);
TensorValue divergence_oneform_of_scalar_gradient(const MetricPatch& g,
                                                  const ScalarField& f,
                                                  std::span<const double> p);
/// (grad scal as a vector value, Hess scal as a (0,2) value); needs order >= 4.
std::pair<TensorValue, TensorValue> scalar_curvature_derivatives(
    const MetricPatch& g, std::span<const double> p, int order = 4);

/// Default jet order for pointwise geometry: enough for curvature (2) plus
/// two more derivatives of derived fields.
inline constexpr int kDefaultJetOrder = 4;

TensorValue jetmat_value(const MetricFrame& fr, const JetMat& m, std::string sig);
TensorValue jetvec_value(const MetricFrame& fr, const JetVec& v, std::string sig);

}  // namespace qys

#pragma once

#include <optional>
#include <span>
#include <vector>

#include "qys/geometry.hpp"

namespace qys {

/// A metric patch plus potential data: the subject of every residual check.
/// In the gradient case the potential is a scalar field f and xi = grad(f);
/// otherwise a raw vector field xi is supplied. eta defaults to the g-dual
/// of xi and may be overridden explicitly.
struct SolitonInstance {
  MetricPatch metric;
  bool gradient = true;
  std::optional<ScalarField> f;    // gradient case
  std::optional<VectorField> xi;   // non-gradient case (or redundant check)
  std::optional<OneForm> eta;      // override of the g-dual
  ScalarField lambda;
  ScalarField mu;
  bool constant_coefficients = false;

  static SolitonInstance gradient_type(MetricPatch g, ScalarField f,
                                       ScalarField lambda, ScalarField mu);
  static SolitonInstance vector_type(MetricPatch g, VectorField xi,
                                     ScalarField lambda, ScalarField mu);
};

/// Shared per-point evaluation state for the residual operations: the
/// metric frame plus xi, eta, lambda, mu and scal as jets.
class SolitonPoint {
 public:
  SolitonPoint(const SolitonInstance& inst, std::span<const double> p,
               int order = kDefaultJetOrder);

  const MetricFrame& frame() const { return fr_; }
  const SolitonInstance& instance() const { return *inst_; }
  int dim() const { return fr_.dim(); }

  const JetVec& xi() const { return xi_; }
  const JetVec& eta() const { return eta_; }
  const Jet& lambda() const { return lambda_; }
  const Jet& mu() const { return mu_; }
  const Jet& scal() const { return scal_; }
  const Jet& f() const;  // gradient case only

  /// (1/2) L_xi g + (lambda - scal) g + mu eta (x) eta.
  JetMat soliton_residual() const;
  /// Hess(f) + (lambda - scal) g + mu df (x) df; gradient case only.
  JetMat gradient_soliton_residual() const;
  /// nabla xi + (lambda - scal) I + mu df (x) xi, as a (1,1) tensor.
  JetMat nabla_xi_residual() const;
  /// nabla_xi xi - [lap(f) + (n-1)(lambda - scal)] xi.
  JetVec generalized_geodesic_residual() const;
  /// lap(f) + n (lambda - scal) + mu |xi|^2.
  Jet trace_identity_residual() const;
  /// |Hess f|^2 + (lambda - scal) lap(f) + (mu/2) xi(|xi|^2).
  Jet pairing_identity_residual() const;
  /// mu^2 |xi|^4 + 2 n mu xi(|xi|^2) + 4 n |Hess f|^2.
  Jet lambda_discriminant() const;
  /// Residual of the quadratic in lambda implied by the trace and pairing
  /// identities: n(lambda-scal)^2 + mu|xi|^2(lambda-scal)
  ///             - |Hess f|^2 - (mu/2) xi(|xi|^2).
  Jet lambda_quadratic_residual() const;
  /// LHS minus RHS of the Bochner-type formula; needs n >= 2.
  Jet bochner_residual() const;

  struct Classification {
    bool torse_forming = false;
    bool concircular = false;
  };
  Classification classify(double tol = 1e-8) const;

  struct MaximumPrincipleResult {
    double s_xi_xi;        // S(xi, xi)
    double curvature_cap;  // (n-1)|nabla xi|^2
    double lap_xi2;        // lap(|xi|^2)
    bool hypothesis_holds;
    bool bound_ok;
  };
  MaximumPrincipleResult maximum_principle(double tol = 1e-8) const;

  struct AlignmentResult {
    TensorValue residual;  // grad(scal) - h xi
    double h;              // xi(scal) / |xi|^2
  };
  AlignmentResult grad_scal_alignment(double xi_threshold = 1e-8) const;

  struct RicciContractionAudit {
    TensorValue res_nn;  // Q xi - [-(n-1) grad scal + (n-1) mu (lambda-scal) xi]
    double res_j;        // S(xi,xi) - [-(n-1) xi(scal) + (n-1) mu (lambda-scal)]
  };
  RicciContractionAudit ricci_contraction_audit() const;

 private:
  const SolitonInstance* inst_;
  MetricFrame fr_;
  std::optional<Jet> f_;
  JetVec xi_;
  JetVec eta_;
  Jet lambda_;
  Jet mu_;
  Jet scal_;

  void require_gradient(const char* op) const;
};

struct Theorem2Report {
  double max_unit_xi_dev = 0.0;      // max | |xi|^2 - 1 |
  double max_xi_xi_scal = 0.0;       // max | xi(xi(scal)) |
  double max_hess_scal_xi_xi = 0.0;  // max | Hess(scal)(xi, xi) |
  double max_hess_identity_res = 0.0;  // audit of the Hess(scal) expansion
  double scal_spread = 0.0;          // max scal - min scal over samples
  bool hypotheses_hold(double tol) const {
    return max_unit_xi_dev <= tol && max_xi_xi_scal <= tol &&
           max_hess_scal_xi_xi <= tol;
  }
};

Theorem2Report theorem2_check(const SolitonInstance& inst,
                              std::span<const std::vector<double>> points,
                              int order = kDefaultJetOrder);

struct FitResult {
  double lambda = 0.0;
  double mu = 0.0;
  double max_residual = 0.0;
  bool identifiable = true;      // normal matrix has full rank
  bool mu_identifiable = true;   // the mu column is non-degenerate
};

/// Least-squares fit of constant (lambda, mu) from the gradient soliton
/// equation over all tensor components at all sample points. Rank-deficient
/// normal equations fall back to the minimum-norm solution and are flagged.
FitResult fit_constants(const MetricPatch& g, const ScalarField& f,
                        std::span<const std::vector<double>> points,
                        int order = kDefaultJetOrder);

/// Max |gradient soliton residual| over samples under given constants; the
/// audit hook for externally asserted coefficients.
double residual_under_constants(const MetricPatch& g, const ScalarField& f,
                                double lambda, double mu,
                                std::span<const std::vector<double>> points,
                                int order = kDefaultJetOrder);

}  // namespace qys

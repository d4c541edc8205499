#pragma once

#include <functional>
#include <span>
#include <vector>

#include "qys/geometry.hpp"
#include "qys/soliton.hpp"

namespace qys {

/// Warped product B x_phi F: block-diagonal metric g_B (+) phi^2 g_F on the
/// concatenated chart. Base and fiber coordinate names must be disjoint;
/// renaming is the caller's job.
struct WarpedProduct {
  MetricPatch base;
  MetricPatch fiber;
  ScalarField warping;  // phi, bound on the base chart, > 0 on the domain
  MetricPatch product;

  int base_dim() const { return base.dim(); }
  int fiber_dim() const { return fiber.dim(); }
  int dim() const { return base.dim() + fiber.dim(); }

  std::vector<double> base_part(std::span<const double> p) const;
  std::vector<double> fiber_part(std::span<const double> p) const;
  std::vector<double> join(std::span<const double> base_p,
                           std::span<const double> fiber_q) const;
};

/// Assembles the product metric. Validation samples live on the base chart;
/// phi must be > 0 at every admissible one.
WarpedProduct build_warped(const MetricPatch& base, const MetricPatch& fiber,
                           const ScalarField& phi,
                           std::span<const std::vector<double>> validation = {});

/// Horizontal-lift identities for a base function at product points:
/// the gradient of the lift has no fiber part, its base part matches the
/// base gradient, and the base block of its Hessian matches the base one.
struct LiftReport {
  double grad_fiber_max = 0.0;
  double grad_base_max = 0.0;
  double hess_base_max = 0.0;
  double metric_mixed_max = 0.0;
};
LiftReport lift_checks(const WarpedProduct& wp, const ScalarField& f,
                       std::span<const std::vector<double>> product_points);

/// scal_B + scal_F/phi^2 - (2m lap(phi)/phi + m(m-1)|grad phi|^2/phi^2).
double warped_scal_formula(const WarpedProduct& wp, std::span<const double> p);
/// Direct product-chart scalar curvature minus the closed formula.
double warped_scal_crosscheck(const WarpedProduct& wp, std::span<const double> p);

/// lap(f) + mu |grad f|^2 - n (grad f)(phi)/phi on the base.
double condition_e36_residual(const MetricPatch& base, const ScalarField& f,
                              const ScalarField& mu, const ScalarField& phi,
                              std::span<const double> p);
/// scal_B - (grad f)(phi)/phi: the base coefficient induced by the warping.
double lambda_base(const MetricPatch& base, const ScalarField& f,
                   const ScalarField& phi, std::span<const double> p);
/// (lambda - lambda_B) phi^2 + 2m phi lap(phi) + m(m-1)|grad phi|^2; must be
/// constant across base samples and equal the fiber's intrinsic scal.
double required_fiber_scal(const MetricPatch& base, const ScalarField& f,
                           const ScalarField& phi, const ScalarField& lambda,
                           int fiber_dim, std::span<const double> p);

struct Theorem3Report {
  double base_residual_max = 0.0;
  double product_residual_max = 0.0;
  double e36_max = 0.0;
  double fiber_scal_spread = 0.0;  // |required fiber scal - actual fiber scal|
  double reduction_max = 0.0;      // lambda - scal - (lambda_B - scal_B)
  double fiber_hessian_max = 0.0;  // fiber-block Hessian identity
  double mixed_block_max = 0.0;    // mixed-block Hessian components
};
/// Soliton transfer between base and warped product. Product points are
/// formed by pairing base points with fiber points cyclically. Throws if the
/// compatibility condition fails at a base sample beyond e36_tol.
Theorem3Report theorem3_verify(const WarpedProduct& wp, const ScalarField& f,
                               const ScalarField& lambda, const ScalarField& mu,
                               std::span<const std::vector<double>> base_points,
                               std::span<const std::vector<double>> fiber_points,
                               double e36_tol = 1e-8);

/// Hess f - (n/2phi)(df (x) dphi + dphi (x) df) + mu df (x) df at p.
TensorValue condition_rrr_residual(const MetricPatch& base, const ScalarField& f,
                                   const ScalarField& mu, const ScalarField& phi,
                                   std::span<const double> p);
struct RrrAudit {
  double trace_vs_e37 = 0.0;       // g-trace of the residual vs the scalar condition
  double nabla_xi_formula = 0.0;   // displayed closed form for nabla xi
};
RrrAudit condition_rrr_audit(const MetricPatch& base, const ScalarField& f,
                             const ScalarField& mu, const ScalarField& phi,
                             std::span<const double> p);

/// Signed residuals of the three divergence identities; the first is
/// unconditional, the other two assume the rank-one condition holds at p.
struct Section33Residuals {
  double e40 = 0.0;
  double e38 = 0.0;
  double e51 = 0.0;
  double rrr_max = 0.0;  // precondition indicator for the last two
};
Section33Residuals section33_pointwise_residual(const MetricPatch& base,
                                                const ScalarField& f,
                                                const ScalarField& mu,
                                                const ScalarField& phi,
                                                std::span<const double> p);

/// Flat-period torus chart: coordinates range over [0, period) and every
/// expression used on it must close up at the seam within 1e-10.
struct PeriodicChart {
  Chart chart;
  std::vector<double> periods;
  std::vector<int> resolution;  // nodes per axis

  static PeriodicChart make(std::vector<std::string> names,
                            std::vector<double> periods, int resolution = 64);
  PeriodicChart with_resolution(int resolution) const;
};

/// Tensor-product trapezoid quadrature of field * sqrt(det g) over one cell;
/// spectrally accurate for smooth periodic integrands. Checks periodicity of
/// the field and the metric at the seam.
double torus_integral(const PeriodicChart& pc, const MetricPatch& g,
                      const ScalarField& field);

/// Seam test for an arbitrary bound expression on the torus.
void require_periodic(const PeriodicChart& pc, const Expr& e);

/// Quadrature of an arbitrary pointwise functional of the metric frame
/// (times the volume element). The caller guarantees periodicity of the
/// integrand; the metric itself is seam-checked.
double torus_functional(const PeriodicChart& pc, const MetricPatch& g,
                        const std::function<double(const MetricFrame&)>& integrand,
                        int order = 3);

struct CompactIntegralReport {
  double ibp_residual = 0.0;          // int d(|xi|^2)(xi) + int |xi|^2 lap f
  double e56_residual = 0.0;          // five-term aggregate, report-only
  double proposition_residual = 0.0;  // traceless-Hessian integral identity
  double er_hess_max = 0.0;           // max |Hess f + mu df (x) df|
  double er_trace_max = 0.0;          // max |lap f + mu |xi|^2|
  double nabla_xi_max = 0.0;          // max |nabla xi|
  double xi4_integral = 0.0;          // int |xi|^4
};
/// Quadrature evaluation of the closed-manifold identities with constant mu.
CompactIntegralReport compact_integral_checks(const PeriodicChart& pc,
                                              const MetricPatch& g,
                                              const ScalarField& f, double mu,
                                              const ScalarField& phi);

}  // namespace qys

#include "qys/soliton.hpp"

#include <algorithm>
#include <cmath>

namespace qys {

SolitonInstance SolitonInstance::gradient_type(MetricPatch g, ScalarField f,
                                               ScalarField lambda, ScalarField mu) {
  SolitonInstance inst;
  inst.metric = std::move(g);
  inst.gradient = true;
  inst.f = std::move(f);
  inst.lambda = std::move(lambda);
  inst.mu = std::move(mu);
  return inst;
}

SolitonInstance SolitonInstance::vector_type(MetricPatch g, VectorField xi,
                                             ScalarField lambda, ScalarField mu) {
  SolitonInstance inst;
  inst.metric = std::move(g);
  inst.gradient = false;
  inst.xi = std::move(xi);
  inst.lambda = std::move(lambda);
  inst.mu = std::move(mu);
  return inst;
}

SolitonPoint::SolitonPoint(const SolitonInstance& inst, std::span<const double> p,
                           int order)
    : inst_(&inst), fr_(inst.metric, p, order),
      lambda_(fr_.eval(inst.lambda.expr)),
      mu_(fr_.eval(inst.mu.expr)),
      scal_(fr_.scalar_curvature()) {
  if (inst.gradient) {
    if (!inst.f) throw InputError("gradient instance without potential f");
    f_ = fr_.eval(inst.f->expr);
    xi_ = fr_.grad(*f_);
  } else {
    if (!inst.xi) throw InputError("vector instance without potential xi");
    xi_ = fr_.eval(inst.xi->comp);
  }
  eta_ = inst.eta ? fr_.eval(inst.eta->comp) : fr_.lower(xi_);
}

const Jet& SolitonPoint::f() const {
  require_gradient("potential access");
  return *f_;
}

void SolitonPoint::require_gradient(const char* op) const {
  if (!inst_->gradient || !f_)
    throw InputError(std::string(op) + " requires a gradient-type instance");
}

JetMat SolitonPoint::soliton_residual() const {
  int n = dim();
  JetMat lie = fr_.lie_metric(xi_);
  Jet coef = lambda_ - scal_;
  JetMat r(n, JetVec(n, fr_.zero()));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      r[i][j] = lie[i][j] * 0.5 + coef * fr_.metric()[i][j] + mu_ * eta_[i] * eta_[j];
  return r;
}

JetMat SolitonPoint::gradient_soliton_residual() const {
  require_gradient("gradient soliton residual");
  int n = dim();
  JetMat hess = fr_.hessian(*f_);
  JetVec df = fr_.grad_covector(*f_);
  Jet coef = lambda_ - scal_;
  JetMat r(n, JetVec(n, fr_.zero()));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      r[i][j] = hess[i][j] + coef * fr_.metric()[i][j] + mu_ * df[i] * df[j];
  return r;
}

JetMat SolitonPoint::nabla_xi_residual() const {
  require_gradient("nabla-xi residual");
  int n = dim();
  JetMat nx = fr_.nabla_vector(xi_);
  JetVec df = fr_.grad_covector(*f_);
  Jet coef = lambda_ - scal_;
  JetMat r(n, JetVec(n, fr_.zero()));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      Jet s = nx[i][j] + mu_ * df[j] * xi_[i];
      if (i == j) s = s + coef;
      r[i][j] = s;
    }
  return r;
}

JetVec SolitonPoint::generalized_geodesic_residual() const {
  require_gradient("generalized geodesic residual");
  int n = dim();
  JetVec acc = fr_.covariant_acceleration(xi_);
  Jet pot = fr_.laplacian(*f_) + static_cast<double>(n - 1) * (lambda_ - scal_);
  JetVec r(n, fr_.zero());
  for (int i = 0; i < n; ++i) r[i] = acc[i] - pot * xi_[i];
  return r;
}

Jet SolitonPoint::trace_identity_residual() const {
  require_gradient("trace identity");
  return fr_.laplacian(*f_) + static_cast<double>(dim()) * (lambda_ - scal_) +
         mu_ * fr_.norm2_vector(xi_);
}

Jet SolitonPoint::pairing_identity_residual() const {
  require_gradient("pairing identity");
  JetMat hess = fr_.hessian(*f_);
  Jet xi_norm2 = fr_.norm2_vector(xi_);
  return fr_.norm2_bilinear(hess) + (lambda_ - scal_) * fr_.laplacian(*f_) +
         mu_ * 0.5 * fr_.apply_vector(xi_, xi_norm2);
}

Jet SolitonPoint::lambda_discriminant() const {
  require_gradient("lambda discriminant");
  double n = dim();
  JetMat hess = fr_.hessian(*f_);
  Jet xi_norm2 = fr_.norm2_vector(xi_);
  return mu_ * mu_ * xi_norm2 * xi_norm2 +
         2.0 * n * mu_ * fr_.apply_vector(xi_, xi_norm2) +
         4.0 * n * fr_.norm2_bilinear(hess);
}

Jet SolitonPoint::lambda_quadratic_residual() const {
  require_gradient("lambda quadratic");
  double n = dim();
  JetMat hess = fr_.hessian(*f_);
  Jet xi_norm2 = fr_.norm2_vector(xi_);
  Jet d = lambda_ - scal_;
  return n * d * d + mu_ * xi_norm2 * d - fr_.norm2_bilinear(hess) -
         mu_ * 0.5 * fr_.apply_vector(xi_, xi_norm2);
}

Jet SolitonPoint::bochner_residual() const {
  require_gradient("Bochner residual");
  int n = dim();
  if (n < 2) throw InputError("Bochner formula needs dimension >= 2");
  double nn = n;
  Jet xi_norm2 = fr_.norm2_vector(xi_);
  JetMat nx = fr_.nabla_vector(xi_);
  JetMat ric = fr_.ricci();
  Jet s_xi_xi = fr_.zero();
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) s_xi_xi = s_xi_xi + ric[i][j] * xi_[i] * xi_[j];
  Jet lhs = fr_.laplacian(xi_norm2) * 0.5;
  Jet bracket = fr_.apply_vector(xi_, mu_) -
                (nn / (nn - 1.0)) * mu_ * mu_ * xi_norm2 -
                (nn * nn / (nn - 1.0)) * lambda_ * mu_ +
                (nn * nn / (nn - 1.0)) * mu_ * scal_;
  Jet rhs = fr_.norm2_mixed(nx) - (1.0 / (nn - 1.0)) * s_xi_xi -
            ((nn - 2.0) / (2.0 * (nn - 1.0))) * mu_ *
                fr_.apply_vector(xi_, xi_norm2) -
            xi_norm2 * bracket;
  return lhs - rhs;
}

SolitonPoint::Classification SolitonPoint::classify(double tol) const {
  Classification c;
  double lam = lambda_.value(), m = mu_.value(), sc = scal_.value();
  c.torse_forming = std::abs(lam - (sc - 1.0)) <= tol && std::abs(m - 1.0) <= tol;
  c.concircular = std::abs(m) <= tol;
  return c;
}

SolitonPoint::MaximumPrincipleResult SolitonPoint::maximum_principle(double tol) const {
  require_gradient("maximum principle check");
  if (std::abs(mu_.value()) > tol)
    throw InputError("maximum principle check requires mu = 0");
  int n = dim();
  JetMat ric = fr_.ricci();
  Jet s_xi_xi = fr_.zero();
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) s_xi_xi = s_xi_xi + ric[i][j] * xi_[i] * xi_[j];
  MaximumPrincipleResult r{};
  r.s_xi_xi = s_xi_xi.value();
  r.curvature_cap = (n - 1.0) * fr_.norm2_mixed(fr_.nabla_vector(xi_)).value();
  r.lap_xi2 = fr_.laplacian(fr_.norm2_vector(xi_)).value();
  r.hypothesis_holds = r.s_xi_xi <= r.curvature_cap + tol;
  r.bound_ok = !r.hypothesis_holds || r.lap_xi2 >= -tol;
  return r;
}

SolitonPoint::AlignmentResult SolitonPoint::grad_scal_alignment(double xi_threshold) const {
  double scale = 0.0;
  for (int i = 0; i < dim(); ++i)
    for (int j = 0; j < dim(); ++j)
      scale = std::max(scale, std::abs(fr_.metric()[i][j].value()));
  Jet xi_norm2 = fr_.norm2_vector(xi_);
  if (xi_norm2.value() <= xi_threshold * scale)
    throw InputError("grad-scal alignment needs xi != 0 at the point");
  JetVec gscal = fr_.grad(scal_);
  Jet h = fr_.apply_vector(xi_, scal_) / xi_norm2;
  JetVec res(dim(), fr_.zero());
  for (int i = 0; i < dim(); ++i) res[i] = gscal[i] - h * xi_[i];
  return {jetvec_value(fr_, res, "u"), h.value()};
}

SolitonPoint::RicciContractionAudit SolitonPoint::ricci_contraction_audit() const {
  int n = dim();
  double c = n - 1.0;
  JetMat q = fr_.ricci_operator();
  JetVec q_xi(n, fr_.zero());
  for (int i = 0; i < n; ++i) {
    Jet s = fr_.zero();
    for (int j = 0; j < n; ++j) s = s + q[i][j] * xi_[j];
    q_xi[i] = s;
  }
  JetVec gscal = fr_.grad(scal_);
  Jet coef = mu_ * (lambda_ - scal_);
  JetVec res_nn(n, fr_.zero());
  for (int i = 0; i < n; ++i)
    res_nn[i] = q_xi[i] + c * gscal[i] - c * coef * xi_[i];
  JetMat ric = fr_.ricci();
  Jet s_xi_xi = fr_.zero();
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) s_xi_xi = s_xi_xi + ric[i][j] * xi_[i] * xi_[j];
  Jet res_j = s_xi_xi + c * fr_.apply_vector(xi_, scal_) - c * coef;
  return {jetvec_value(fr_, res_nn, "u"), res_j.value()};
}

Theorem2Report theorem2_check(const SolitonInstance& inst,
                              std::span<const std::vector<double>> points,
                              int order) {
  if (order < 4) throw OrderError("theorem-2 check needs jet order >= 4");
  Theorem2Report rep;
  double scal_min = 0.0, scal_max = 0.0;
  bool first = true;
  for (const auto& p : points) {
    SolitonPoint sp(inst, p, order);
    const MetricFrame& fr = sp.frame();
    Jet xi_norm2 = fr.norm2_vector(sp.xi());
    rep.max_unit_xi_dev =
        std::max(rep.max_unit_xi_dev, std::abs(xi_norm2.value() - 1.0));
    Jet xi_scal = fr.apply_vector(sp.xi(), sp.scal());
    Jet xi_xi_scal = fr.apply_vector(sp.xi(), xi_scal);
    rep.max_xi_xi_scal = std::max(rep.max_xi_xi_scal, std::abs(xi_xi_scal.value()));
    JetMat hscal = fr.hessian(sp.scal());
    Jet h_xx = fr.zero();
    for (int i = 0; i < fr.dim(); ++i)
      for (int j = 0; j < fr.dim(); ++j)
        h_xx = h_xx + hscal[i][j] * sp.xi()[i] * sp.xi()[j];
    rep.max_hess_scal_xi_xi = std::max(rep.max_hess_scal_xi_xi, std::abs(h_xx.value()));
    // Audit: Hess(scal)(xi,xi) = xi(xi(scal)) - (nabla_xi xi)(scal).
    JetVec acc = fr.covariant_acceleration(sp.xi());
    Jet acc_scal = fr.apply_vector(acc, sp.scal());
    rep.max_hess_identity_res = std::max(
        rep.max_hess_identity_res,
        std::abs(h_xx.value() - (xi_xi_scal.value() - acc_scal.value())));
    double sc = sp.scal().value();
    if (first) {
      scal_min = scal_max = sc;
      first = false;
    } else {
      scal_min = std::min(scal_min, sc);
      scal_max = std::max(scal_max, sc);
    }
  }
  rep.scal_spread = first ? 0.0 : scal_max - scal_min;
  return rep;
}

FitResult fit_constants(const MetricPatch& g, const ScalarField& f,
                        std::span<const std::vector<double>> points,
                        int order) {
  if (points.size() < 2)
    throw InputError("constant fit needs at least 2 sample points");
  int n = g.dim();
  // Columns: lambda -> g_ij, mu -> (df (x) df)_ij; rhs = scal*g_ij - Hess_ij.
  double n00 = 0, n01 = 0, n11 = 0, c0 = 0, c1 = 0;
  double col_mu_norm2 = 0;
  struct Row { double a0, a1, b; };
  std::vector<Row> rows;
  int used = 0;
  for (const auto& p : points) {
    if (!g.chart().admissible(p)) continue;
    ++used;
    MetricFrame fr(g, p, order);
    Jet fj = fr.eval(f.expr);
    JetMat hess = fr.hessian(fj);
    JetVec df = fr.grad_covector(fj);
    double sc = fr.scalar_curvature().value();
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        double a0 = fr.metric()[i][j].value();
        double a1 = df[i].value() * df[j].value();
        double b = sc * a0 - hess[i][j].value();
        rows.push_back({a0, a1, b});
        n00 += a0 * a0;
        n01 += a0 * a1;
        n11 += a1 * a1;
        c0 += a0 * b;
        c1 += a1 * b;
        col_mu_norm2 += a1 * a1;
      }
  }
  if (used == 0) throw InputError("constant fit: all sample points inadmissible");

  FitResult res;
  double det = n00 * n11 - n01 * n01;
  double scale = std::max(std::abs(n00), std::abs(n11));
  if (det > 1e-12 * scale * scale) {
    res.lambda = (n11 * c0 - n01 * c1) / det;
    res.mu = (n00 * c1 - n01 * c0) / det;
  } else {
    // Minimum-norm solution of the rank-deficient normal equations.
    res.identifiable = false;
    res.mu_identifiable = col_mu_norm2 > 1e-14 * scale;
    // Eigen-decomposition of the symmetric 2x2 normal matrix.
    double tr = n00 + n11;
    double disc = std::sqrt(std::max((n00 - n11) * (n00 - n11) + 4 * n01 * n01, 0.0));
    double ev1 = (tr + disc) / 2.0;
    double sol0 = 0.0, sol1 = 0.0;
    if (ev1 > 1e-14 * std::max(scale, 1.0)) {
      double vx, vy;
      if (std::abs(n01) > 1e-300) {
        vx = ev1 - n11;
        vy = n01;
      } else if (n00 >= n11) {
        vx = 1.0; vy = 0.0;
      } else {
        vx = 0.0; vy = 1.0;
      }
      double vn = std::hypot(vx, vy);
      vx /= vn;
      vy /= vn;
      double proj = (vx * c0 + vy * c1) / ev1;
      sol0 = proj * vx;
      sol1 = proj * vy;
    }
    res.lambda = sol0;
    res.mu = sol1;
  }
  for (const Row& r : rows) {
    res.max_residual = std::max(res.max_residual,
                                std::abs(r.a0 * res.lambda + r.a1 * res.mu - r.b));
  }
  return res;
}

double residual_under_constants(const MetricPatch& g, const ScalarField& f,
                                double lambda, double mu,
                                std::span<const std::vector<double>> points,
                                int order) {
  SolitonInstance inst = SolitonInstance::gradient_type(
      g, f, ScalarField{g.chart(), Expr::literal(lambda).bind(g.chart().names())},
      ScalarField{g.chart(), Expr::literal(mu).bind(g.chart().names())});
  double worst = 0.0;
  for (const auto& p : points) {
    SolitonPoint sp(inst, p, order);
    JetMat r = sp.gradient_soliton_residual();
    for (int i = 0; i < sp.dim(); ++i)
      for (int j = 0; j < sp.dim(); ++j)
        worst = std::max(worst, std::abs(r[i][j].value()));
  }
  return worst;
}

}  // namespace qys

#include "qys/warp.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

namespace qys {

namespace {

double pairwise_sum(std::span<const double> v) {
  if (v.empty()) return 0.0;
  if (v.size() == 1) return v[0];
  std::size_t half = v.size() / 2;
  return pairwise_sum(v.subspan(0, half)) + pairwise_sum(v.subspan(half));
}

double det_values(const JetMat& g) {
  int n = static_cast<int>(g.size());
  std::vector<double> a(n * n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) a[i * n + j] = g[i][j].value();
  double det = 1.0;
  for (int col = 0; col < n; ++col) {
    int pivot = col;
    for (int r = col + 1; r < n; ++r)
      if (std::abs(a[r * n + col]) > std::abs(a[pivot * n + col])) pivot = r;
    if (a[pivot * n + col] == 0.0) return 0.0;
    if (pivot != col) {
      for (int j = 0; j < n; ++j) std::swap(a[pivot * n + j], a[col * n + j]);
      det = -det;
    }
    det *= a[col * n + col];
    for (int r = col + 1; r < n; ++r) {
      double fct = a[r * n + col] / a[col * n + col];
      for (int j = col; j < n; ++j) a[r * n + j] -= fct * a[col * n + j];
    }
  }
  return det;
}

// Shared per-point state for the base-side section-3 conditions.
struct BasePoint {
  MetricFrame fr;
  Jet fj, muj, phij;
  JetVec xi;       // grad f
  Jet xi2;         // |grad f|^2
  Jet dphi_xi;     // (grad f)(phi)
  Jet lapf;

  BasePoint(const MetricPatch& g, const ScalarField& f, const ScalarField& mu,
            const ScalarField& phi, std::span<const double> p, int order)
      : fr(g, p, order),
        fj(fr.eval(f.expr)),
        muj(fr.eval(mu.expr)),
        phij(fr.eval(phi.expr)),
        xi(fr.grad(fj)),
        xi2(fr.norm2_vector(xi)),
        dphi_xi(fr.apply_vector(xi, phij)),
        lapf(fr.laplacian(fj)) {
    if (phij.value() <= 0.0)
      throw DomainError("warping function must be positive at the sample point");
  }
};

}  // namespace

std::vector<double> WarpedProduct::base_part(std::span<const double> p) const {
  if (static_cast<int>(p.size()) != dim())
    throw InputError("point dimension does not match the product chart");
  return {p.begin(), p.begin() + base_dim()};
}

std::vector<double> WarpedProduct::fiber_part(std::span<const double> p) const {
  if (static_cast<int>(p.size()) != dim())
    throw InputError("point dimension does not match the product chart");
  return {p.begin() + base_dim(), p.end()};
}

std::vector<double> WarpedProduct::join(std::span<const double> base_p,
                                        std::span<const double> fiber_q) const {
  if (static_cast<int>(base_p.size()) != base_dim() ||
      static_cast<int>(fiber_q.size()) != fiber_dim())
    throw InputError("join: part dimensions do not match base/fiber charts");
  std::vector<double> p(base_p.begin(), base_p.end());
  p.insert(p.end(), fiber_q.begin(), fiber_q.end());
  return p;
}

WarpedProduct build_warped(const MetricPatch& base, const MetricPatch& fiber,
                           const ScalarField& phi,
                           std::span<const std::vector<double>> validation) {
  int n = base.dim(), m = fiber.dim();
  std::set<std::string> base_names(base.chart().names().begin(),
                                   base.chart().names().end());
  for (const std::string& name : fiber.chart().names()) {
    if (base_names.count(name))
      throw InputError("base and fiber charts share the coordinate name '" +
                       name + "'");
  }
  for (const auto& p : validation) {
    if (!base.chart().admissible(p)) continue;
    if (phi.expr.eval(p) <= 0.0) {
      std::ostringstream os;
      os << "warping function '" << phi.expr.str()
         << "' is not positive at a validation sample";
      throw DomainError(os.str());
    }
  }

  std::vector<std::string> names = base.chart().names();
  names.insert(names.end(), fiber.chart().names().begin(),
               fiber.chart().names().end());
  std::vector<Expr> constraints = base.chart().constraints();
  constraints.insert(constraints.end(), fiber.chart().constraints().begin(),
                     fiber.chart().constraints().end());
  Chart product_chart(names, constraints);

  int d = n + m;
  Expr phi2 = phi.expr * phi.expr;
  std::vector<std::vector<Expr>> comp(d, std::vector<Expr>(d));
  for (int i = 0; i < d; ++i) {
    for (int j = i; j < d; ++j) {
      if (i < n && j < n) {
        comp[i][j] = base.component(i, j);
      } else if (i >= n && j >= n) {
        comp[i][j] = phi2 * fiber.component(i - n, j - n);
      } else {
        comp[i][j] = Expr::literal(0.0);
      }
    }
  }
  WarpedProduct wp;
  wp.base = base;
  wp.fiber = fiber;
  wp.warping = phi;
  wp.product = MetricPatch(product_chart, std::move(comp));
  return wp;
}

LiftReport lift_checks(const WarpedProduct& wp, const ScalarField& f,
                       std::span<const std::vector<double>> product_points) {
  int n = wp.base_dim(), d = wp.dim();
  Expr lifted = wp.product.chart().bind(f.expr);
  LiftReport rep;
  for (const auto& p : product_points) {
    MetricFrame fr(wp.product, p, 3);
    Jet fj = fr.eval(lifted);
    JetVec gr = fr.grad(fj);
    JetMat hess = fr.hessian(fj);
    std::vector<double> bp = wp.base_part(p);
    MetricFrame bfr(wp.base, bp, 3);
    Jet bfj = bfr.eval(f.expr);
    JetVec bgr = bfr.grad(bfj);
    JetMat bhess = bfr.hessian(bfj);
    for (int i = n; i < d; ++i)
      rep.grad_fiber_max = std::max(rep.grad_fiber_max, std::abs(gr[i].value()));
    for (int i = 0; i < n; ++i)
      rep.grad_base_max =
          std::max(rep.grad_base_max, std::abs(gr[i].value() - bgr[i].value()));
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        rep.hess_base_max = std::max(
            rep.hess_base_max, std::abs(hess[i][j].value() - bhess[i][j].value()));
    for (int i = 0; i < n; ++i)
      for (int j = n; j < d; ++j)
        rep.metric_mixed_max = std::max(rep.metric_mixed_max,
                                        std::abs(fr.metric()[i][j].value()));
  }
  return rep;
}

double warped_scal_formula(const WarpedProduct& wp, std::span<const double> p) {
  int m = wp.fiber_dim();
  std::vector<double> bp = wp.base_part(p);
  std::vector<double> fq = wp.fiber_part(p);
  MetricFrame bfr(wp.base, bp, 3);
  Jet phij = bfr.eval(wp.warping.expr);
  if (phij.value() <= 0.0)
    throw DomainError("warping function must be positive at the sample point");
  double phi = phij.value();
  double lap_phi = bfr.laplacian(phij).value();
  double grad_phi2 = bfr.norm2_vector(bfr.grad(phij)).value();
  double scal_b = bfr.scalar_curvature().value();
  double scal_f = scalar_curvature(wp.fiber, fq);
  return scal_b + scal_f / (phi * phi) -
         (2.0 * m * lap_phi / phi + m * (m - 1.0) * grad_phi2 / (phi * phi));
}

double warped_scal_crosscheck(const WarpedProduct& wp, std::span<const double> p) {
  return scalar_curvature(wp.product, p) - warped_scal_formula(wp, p);
}

double condition_e36_residual(const MetricPatch& base, const ScalarField& f,
                              const ScalarField& mu, const ScalarField& phi,
                              std::span<const double> p) {
  BasePoint bp(base, f, mu, phi, p, 3);
  double n = base.dim();
  return bp.lapf.value() + bp.muj.value() * bp.xi2.value() -
         n * bp.dphi_xi.value() / bp.phij.value();
}

double lambda_base(const MetricPatch& base, const ScalarField& f,
                   const ScalarField& phi, std::span<const double> p) {
  ScalarField zero{base.chart(), Expr::literal(0.0).bind(base.chart().names())};
  BasePoint bp(base, f, zero, phi, p, 3);
  return bp.fr.scalar_curvature().value() -
         bp.dphi_xi.value() / bp.phij.value();
}

double required_fiber_scal(const MetricPatch& base, const ScalarField& f,
                           const ScalarField& phi, const ScalarField& lambda,
                           int fiber_dim, std::span<const double> p) {
  ScalarField zero{base.chart(), Expr::literal(0.0).bind(base.chart().names())};
  BasePoint bp(base, f, zero, phi, p, 3);
  double m = fiber_dim;
  double phival = bp.phij.value();
  double lam = bp.fr.eval(lambda.expr).value();
  double lam_b =
      bp.fr.scalar_curvature().value() - bp.dphi_xi.value() / phival;
  double lap_phi = bp.fr.laplacian(bp.phij).value();
  double grad_phi2 = bp.fr.norm2_vector(bp.fr.grad(bp.phij)).value();
  return (lam - lam_b) * phival * phival + 2.0 * m * phival * lap_phi +
         m * (m - 1.0) * grad_phi2;
}

Theorem3Report theorem3_verify(const WarpedProduct& wp, const ScalarField& f,
                               const ScalarField& lambda, const ScalarField& mu,
                               std::span<const std::vector<double>> base_points,
                               std::span<const std::vector<double>> fiber_points,
                               double e36_tol) {
  if (base_points.empty() || fiber_points.empty())
    throw InputError("soliton transfer check needs base and fiber samples");
  int n = wp.base_dim(), m = wp.fiber_dim(), d = wp.dim();
  Theorem3Report rep;

  // Compatibility precondition at the base samples.
  std::ostringstream violations;
  int violated = 0;
  for (const auto& p : base_points) {
    double r = condition_e36_residual(wp.base, f, mu, wp.warping, p);
    rep.e36_max = std::max(rep.e36_max, std::abs(r));
    if (std::abs(r) > e36_tol) {
      ++violated;
      violations << "\n  residual " << r << " at (";
      for (std::size_t i = 0; i < p.size(); ++i)
        violations << (i ? "," : "") << p[i];
      violations << ")";
    }
  }
  if (violated > 0)
    throw InputError("compatibility condition violated at " +
                     std::to_string(violated) + " base sample(s):" +
                     violations.str());

  // Base-side residual and the required fiber curvature across base samples.
  std::vector<double> required;
  for (const auto& p : base_points) {
    BasePoint bp(wp.base, f, mu, wp.warping, p, 4);
    JetMat hess = bp.fr.hessian(bp.fj);
    JetVec df = bp.fr.grad_covector(bp.fj);
    double coef = -bp.dphi_xi.value() / bp.phij.value();  // lambda_B - scal_B
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        double r = hess[i][j].value() + coef * bp.fr.metric()[i][j].value() +
                   bp.muj.value() * df[i].value() * df[j].value();
        rep.base_residual_max = std::max(rep.base_residual_max, std::abs(r));
      }
    required.push_back(required_fiber_scal(wp.base, f, wp.warping, lambda, m, p));
  }
  double req_min = *std::min_element(required.begin(), required.end());
  double req_max = *std::max_element(required.begin(), required.end());
  double fib_min = 0.0, fib_max = 0.0;
  for (std::size_t j = 0; j < fiber_points.size(); ++j) {
    double s = scalar_curvature(wp.fiber, fiber_points[j]);
    if (j == 0) fib_min = fib_max = s;
    fib_min = std::min(fib_min, s);
    fib_max = std::max(fib_max, s);
  }
  rep.fiber_scal_spread =
      std::max(std::abs(req_max - fib_min), std::abs(fib_max - req_min));

  // Product-side residual plus the structural identities from the proof.
  Expr lifted_f = wp.product.chart().bind(f.expr);
  Expr lifted_lam = wp.product.chart().bind(lambda.expr);
  Expr lifted_mu = wp.product.chart().bind(mu.expr);
  for (std::size_t i = 0; i < base_points.size(); ++i) {
    const auto& bp = base_points[i];
    const auto& fq = fiber_points[i % fiber_points.size()];
    std::vector<double> p = wp.join(bp, fq);
    MetricFrame fr(wp.product, p, 4);
    Jet fj = fr.eval(lifted_f);
    Jet lam = fr.eval(lifted_lam);
    Jet muj = fr.eval(lifted_mu);
    Jet scal = fr.scalar_curvature();
    JetMat hess = fr.hessian(fj);
    JetVec df = fr.grad_covector(fj);
    double coef = lam.value() - scal.value();
    for (int a = 0; a < d; ++a)
      for (int b = 0; b < d; ++b) {
        double r = hess[a][b].value() + coef * fr.metric()[a][b].value() +
                   muj.value() * df[a].value() * df[b].value();
        rep.product_residual_max = std::max(rep.product_residual_max, std::abs(r));
      }

    BasePoint base_state(wp.base, f, mu, wp.warping, bp, 3);
    double coef_b =
        -base_state.dphi_xi.value() / base_state.phij.value();  // lambda_B - scal_B
    rep.reduction_max = std::max(rep.reduction_max, std::abs(coef - coef_b));
    double c = base_state.dphi_xi.value() / base_state.phij.value();
    for (int a = n; a < d; ++a)
      for (int b = n; b < d; ++b) {
        double r = hess[a][b].value() - c * fr.metric()[a][b].value();
        rep.fiber_hessian_max = std::max(rep.fiber_hessian_max, std::abs(r));
      }
    for (int a = 0; a < n; ++a)
      for (int b = n; b < d; ++b)
        rep.mixed_block_max =
            std::max(rep.mixed_block_max, std::abs(hess[a][b].value()));
  }
  return rep;
}

TensorValue condition_rrr_residual(const MetricPatch& base, const ScalarField& f,
                                   const ScalarField& mu, const ScalarField& phi,
                                   std::span<const double> p) {
  int n = base.dim();
  BasePoint bp(base, f, mu, phi, p, 3);
  JetMat hess = bp.fr.hessian(bp.fj);
  JetVec df = bp.fr.grad_covector(bp.fj);
  JetVec dphi = bp.fr.grad_covector(bp.phij);
  Jet half_n_over_phi = (0.5 * n) * jet_reciprocal(bp.phij);
  JetMat r(n, JetVec(n, bp.fr.zero()));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      r[i][j] = hess[i][j] -
                half_n_over_phi * (df[i] * dphi[j] + dphi[i] * df[j]) +
                bp.muj * df[i] * df[j];
  return jetmat_value(bp.fr, r, "dd");
}

RrrAudit condition_rrr_audit(const MetricPatch& base, const ScalarField& f,
                             const ScalarField& mu, const ScalarField& phi,
                             std::span<const double> p) {
  int n = base.dim();
  BasePoint bp(base, f, mu, phi, p, 3);
  JetMat hess = bp.fr.hessian(bp.fj);
  JetVec df = bp.fr.grad_covector(bp.fj);
  JetVec dphi = bp.fr.grad_covector(bp.phij);
  double phival = bp.phij.value();
  double muval = bp.muj.value();

  RrrAudit audit;
  // g-trace of the rank-one condition against its scalar consequence.
  double trace = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      double rij = hess[i][j].value() -
                   (n / (2.0 * phival)) *
                       (df[i].value() * dphi[j].value() +
                        dphi[i].value() * df[j].value()) +
                   muval * df[i].value() * df[j].value();
      trace += bp.fr.inverse_metric()[i][j].value() * rij;
    }
  double scalar_form = bp.lapf.value() + muval * bp.xi2.value() -
                       n * bp.dphi_xi.value() / phival;
  audit.trace_vs_e37 = std::abs(trace - scalar_form);

  // Displayed closed form for nabla xi as a (1,1) tensor.
  JetMat nx = bp.fr.nabla_vector(bp.xi);
  JetVec gphi = bp.fr.grad(bp.phij);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      double formula = (n / (2.0 * phival)) *
                           (df[j].value() * gphi[i].value() +
                            dphi[j].value() * bp.xi[i].value()) -
                       muval * df[j].value() * bp.xi[i].value();
      audit.nabla_xi_formula =
          std::max(audit.nabla_xi_formula, std::abs(nx[i][j].value() - formula));
    }
  return audit;
}

Section33Residuals section33_pointwise_residual(const MetricPatch& base,
                                                const ScalarField& f,
                                                const ScalarField& mu,
                                                const ScalarField& phi,
                                                std::span<const double> p) {
  int n = base.dim();
  BasePoint bp(base, f, mu, phi, p, 4);
  const MetricFrame& fr = bp.fr;
  JetMat hess = fr.hessian(bp.fj);
  JetVec div_hess = fr.div_bilinear(hess);
  Jet div_hess_xi = fr.zero();
  for (int j = 0; j < n; ++j) div_hess_xi = div_hess_xi + div_hess[j] * bp.xi[j];

  // div(Hess(f)(xi)) with Hess(f)(xi) as a one-form.
  JetVec hess_xi(n, fr.zero());
  for (int j = 0; j < n; ++j) {
    Jet s = fr.zero();
    for (int k = 0; k < n; ++k) s = s + hess[j][k] * bp.xi[k];
    hess_xi[j] = s;
  }
  Jet div_hess_xi_field = fr.div_oneform(hess_xi);

  Jet traceless2 = [&] {
    JetMat t = hess;
    Jet lap_over_n = bp.lapf / static_cast<double>(n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        t[i][j] = hess[i][j] - lap_over_n * fr.metric()[i][j];
    return fr.norm2_bilinear(t);
  }();
  double lapf = bp.lapf.value();
  Section33Residuals res;
  res.e40 = div_hess_xi.value() -
            (div_hess_xi_field.value() - traceless2.value() -
             lapf * lapf / n);

  // Shared right-hand block of the two divergence consequences.
  double phival = bp.phij.value();
  double muval = bp.muj.value();
  double dphi_xi = bp.dphi_xi.value();
  JetVec gphi = fr.grad(bp.phij);
  JetMat nabla_gphi = fr.nabla_vector(gphi);
  Jet nxi_gphi_dot_xi = fr.zero();  // g(nabla_xi grad(phi), xi)
  {
    JetVec xi_low = fr.lower(bp.xi);
    for (int i = 0; i < n; ++i) {
      Jet comp = fr.zero();
      for (int j = 0; j < n; ++j) comp = comp + nabla_gphi[i][j] * bp.xi[j];
      nxi_gphi_dot_xi = nxi_gphi_dot_xi + comp * xi_low[i];
    }
  }
  double d_xi2_xi = fr.apply_vector(bp.xi, bp.xi2).value();
  double dmu_xi = fr.apply_vector(bp.xi, bp.muj).value();
  double xi2 = bp.xi2.value();
  double block = n * (lapf / phival - dphi_xi / (phival * phival)) * dphi_xi +
                 (n / phival) * nxi_gphi_dot_xi.value() -
                 0.5 * muval * d_xi2_xi - muval * lapf * xi2 - dmu_xi * xi2;

  res.e38 = div_hess_xi.value() - block;
  res.e51 =
      div_hess_xi_field.value() - (traceless2.value() + lapf * lapf / n + block);

  TensorValue rrr = condition_rrr_residual(base, f, mu, phi, p);
  res.rrr_max = rrr.max_abs();
  return res;
}

PeriodicChart PeriodicChart::make(std::vector<std::string> names,
                                  std::vector<double> periods, int resolution) {
  if (names.size() != periods.size())
    throw InputError("periodic chart: one period per coordinate required");
  for (double t : periods)
    if (!(t > 0.0)) throw InputError("periodic chart: periods must be positive");
  if (resolution < 2)
    throw InputError("periodic chart: resolution must be at least 2");
  PeriodicChart pc;
  pc.chart = Chart::make(std::move(names));
  pc.periods = std::move(periods);
  pc.resolution.assign(pc.periods.size(), resolution);
  return pc;
}

PeriodicChart PeriodicChart::with_resolution(int resolution) const {
  if (resolution < 2)
    throw InputError("periodic chart: resolution must be at least 2");
  PeriodicChart pc = *this;
  pc.resolution.assign(pc.periods.size(), resolution);
  return pc;
}

// Seam test: every expression must take the same value at x and x + period
// along each axis, at a fixed set of probe points.
void require_periodic(const PeriodicChart& pc, const Expr& e) {
  int d = pc.chart.dim();
  static const double fractions[] = {0.13, 0.41, 0.67, 0.89};
  for (int axis = 0; axis < d; ++axis) {
    for (double fa : fractions) {
      std::vector<double> p(d);
      for (int k = 0; k < d; ++k)
        p[k] = pc.periods[k] * (k == axis ? 0.0 : fa);
      p[axis] = pc.periods[axis] * fa * 0.5;  // vary along the axis too
      std::vector<double> q = p;
      q[axis] += pc.periods[axis];
      double a = e.eval(p);
      double b = e.eval(q);
      if (std::abs(a - b) > 1e-10 * (1.0 + std::abs(a)))
        throw InputError("expression '" + e.str() +
                         "' is not periodic at the seam");
    }
  }
}

namespace {

void require_periodic_metric(const PeriodicChart& pc, const MetricPatch& g) {
  for (int i = 0; i < g.dim(); ++i)
    for (int j = i; j < g.dim(); ++j) require_periodic(pc, g.component(i, j));
}

// Grid walk: calls fn with each node point; rectangle rule == trapezoid for
// periodic integrands.
template <typename Fn>
void for_each_node(const PeriodicChart& pc, Fn&& fn) {
  int d = pc.chart.dim();
  std::vector<int> idx(d, 0);
  std::vector<double> p(d, 0.0);
  while (true) {
    for (int k = 0; k < d; ++k)
      p[k] = pc.periods[k] * idx[k] / pc.resolution[k];
    fn(p);
    int k = 0;
    while (k < d && ++idx[k] == pc.resolution[k]) idx[k++] = 0;
    if (k == d) break;
  }
}

double cell_weight(const PeriodicChart& pc) {
  double w = 1.0;
  for (std::size_t k = 0; k < pc.periods.size(); ++k)
    w *= pc.periods[k] / pc.resolution[k];
  return w;
}

}  // namespace

double torus_integral(const PeriodicChart& pc, const MetricPatch& g,
                      const ScalarField& field) {
  if (g.dim() != pc.chart.dim())
    throw InputError("torus integral: metric and chart dimensions differ");
  require_periodic_metric(pc, g);
  Expr bound = pc.chart.bind(field.expr);
  require_periodic(pc, bound);
  std::vector<double> values;
  for_each_node(pc, [&](const std::vector<double>& p) {
    MetricFrame fr(g, p, 2);
    double vol = std::sqrt(det_values(fr.metric()));
    values.push_back(fr.eval(bound).value() * vol);
  });
  return pairwise_sum(values) * cell_weight(pc);
}

double torus_functional(const PeriodicChart& pc, const MetricPatch& g,
                        const std::function<double(const MetricFrame&)>& integrand,
                        int order) {
  if (g.dim() != pc.chart.dim())
    throw InputError("torus integral: metric and chart dimensions differ");
  require_periodic_metric(pc, g);
  std::vector<double> values;
  for_each_node(pc, [&](const std::vector<double>& p) {
    MetricFrame fr(g, p, order);
    double vol = std::sqrt(det_values(fr.metric()));
    values.push_back(integrand(fr) * vol);
  });
  return pairwise_sum(values) * cell_weight(pc);
}

CompactIntegralReport compact_integral_checks(const PeriodicChart& pc,
                                              const MetricPatch& g,
                                              const ScalarField& f, double mu,
                                              const ScalarField& phi) {
  int n = g.dim();
  if (n != pc.chart.dim())
    throw InputError("compact checks: metric and chart dimensions differ");
  require_periodic_metric(pc, g);
  Expr f_bound = pc.chart.bind(f.expr);
  Expr phi_bound = pc.chart.bind(phi.expr);
  require_periodic(pc, f_bound);
  require_periodic(pc, phi_bound);

  std::vector<double> i_dxi2_xi, i_xi2_lapf, i_traceless, i_hess2, i_lapf2;
  std::vector<double> i_t2, i_xi2, i_t4, i_t5, i_xi4;
  CompactIntegralReport rep;

  for_each_node(pc, [&](const std::vector<double>& p) {
    MetricFrame fr(g, p, 3);
    double vol = std::sqrt(det_values(fr.metric()));
    Jet fj = fr.eval(f_bound);
    Jet phij = fr.eval(phi_bound);
    if (phij.value() <= 0.0)
      throw DomainError("warping function must be positive on the torus");
    JetVec xi = fr.grad(fj);
    Jet xi2 = fr.norm2_vector(xi);
    Jet lapf = fr.laplacian(fj);
    JetMat hess = fr.hessian(fj);
    Jet hess2 = fr.norm2_bilinear(hess);
    Jet traceless2 = [&] {
      JetMat t = hess;
      Jet lap_over_n = lapf / static_cast<double>(n);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
          t[i][j] = hess[i][j] - lap_over_n * fr.metric()[i][j];
      return fr.norm2_bilinear(t);
    }();
    double dphi_xi = fr.apply_vector(xi, phij).value();
    double phival = phij.value();

    JetVec gphi = fr.grad(phij);
    JetMat nabla_gphi = fr.nabla_vector(gphi);
    double nxi_gphi_dot_xi = 0.0;
    {
      JetVec xi_low = fr.lower(xi);
      for (int i = 0; i < n; ++i) {
        double comp = 0.0;
        for (int j = 0; j < n; ++j)
          comp += nabla_gphi[i][j].value() * xi[j].value();
        nxi_gphi_dot_xi += comp * xi_low[i].value();
      }
    }

    i_dxi2_xi.push_back(fr.apply_vector(xi, xi2).value() * vol);
    i_xi2_lapf.push_back(xi2.value() * lapf.value() * vol);
    i_traceless.push_back(traceless2.value() * vol);
    i_hess2.push_back(hess2.value() * vol);
    i_lapf2.push_back(lapf.value() * lapf.value() * vol);
    i_t2.push_back(lapf.value() * dphi_xi / phival * vol);
    i_xi2.push_back(xi2.value() * vol);
    i_t4.push_back(dphi_xi * dphi_xi / (phival * phival) * vol);
    i_t5.push_back(nxi_gphi_dot_xi / phival * vol);
    i_xi4.push_back(xi2.value() * xi2.value() * vol);

    // Product-case residuals and the covariant-derivative magnitude.
    JetVec df = fr.grad_covector(fj);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        double er = hess[i][j].value() + mu * df[i].value() * df[j].value();
        rep.er_hess_max = std::max(rep.er_hess_max, std::abs(er));
      }
    rep.er_trace_max = std::max(rep.er_trace_max,
                                std::abs(lapf.value() + mu * xi2.value()));
    rep.nabla_xi_max = std::max(
        rep.nabla_xi_max,
        std::sqrt(std::max(fr.norm2_mixed(fr.nabla_vector(xi)).value(), 0.0)));
  });

  double w = cell_weight(pc);
  auto integral = [&](const std::vector<double>& v) {
    return pairwise_sum(v) * w;
  };
  rep.ibp_residual = integral(i_dxi2_xi) + integral(i_xi2_lapf);
  rep.proposition_residual =
      integral(i_traceless) - (integral(i_hess2) - integral(i_lapf2) / n);
  rep.e56_residual = integral(i_traceless) + (n + 1.0) * integral(i_t2) +
                     ((2.0 - mu) * n + 2.0) / (2.0 * n) * integral(i_xi2) -
                     n * integral(i_t4) + n * integral(i_t5);
  rep.xi4_integral = integral(i_xi4);
  return rep;
}

}  // namespace qys

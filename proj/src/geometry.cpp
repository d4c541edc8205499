#include "qys/geometry.hpp"

#include <cmath>
#include <sstream>

namespace qys {

namespace {

JetMat jet_matrix(int n, const Jet& zero) { return JetMat(n, JetVec(n, zero)); }

// Gauss-Jordan inverse over the jet ring; pivots on constant-term magnitude.
JetMat invert(const JetMat& m, const Jet& zero) {
  int n = static_cast<int>(m.size());
  JetMat a = m;
  JetMat inv = jet_matrix(n, zero);
  for (int i = 0; i < n; ++i) inv[i][i] = zero + 1.0;
  for (int col = 0; col < n; ++col) {
    int pivot = col;
    for (int r = col + 1; r < n; ++r) {
      if (std::abs(a[r][col].value()) > std::abs(a[pivot][col].value())) pivot = r;
    }
    if (a[pivot][col].value() == 0.0)
      throw DomainError("metric matrix is singular at the sample point");
    std::swap(a[pivot], a[col]);
    std::swap(inv[pivot], inv[col]);
    Jet d = jet_reciprocal(a[col][col]);
    for (int j = 0; j < n; ++j) {
      a[col][j] = a[col][j] * d;
      inv[col][j] = inv[col][j] * d;
    }
    for (int r = 0; r < n; ++r) {
      if (r == col) continue;
      Jet f = a[r][col];
      if (f.value() == 0.0) {
        bool zerojet = true;
        for (double c : f.coeffs())
          if (c != 0.0) { zerojet = false; break; }
        if (zerojet) continue;
      }
      for (int j = 0; j < n; ++j) {
        a[r][j] = a[r][j] - f * a[col][j];
        inv[r][j] = inv[r][j] - f * inv[col][j];
      }
    }
  }
  return inv;
}

// Positive-definiteness of the value matrix via Cholesky.
bool spd_values(const JetMat& g) {
  int n = static_cast<int>(g.size());
  std::vector<double> l(n * n, 0.0);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j <= i; ++j) {
      double s = g[i][j].value();
      for (int k = 0; k < j; ++k) s -= l[i * n + k] * l[j * n + k];
      if (i == j) {
        if (s <= 0.0) return false;
        l[i * n + i] = std::sqrt(s);
      } else {
        l[i * n + j] = s / l[j * n + j];
      }
    }
  }
  return true;
}

}  // namespace

MetricPatch::MetricPatch(Chart chart, std::vector<std::vector<Expr>> components)
    : chart_(std::move(chart)), comp_(std::move(components)) {
  int n = chart_.dim();
  if (static_cast<int>(comp_.size()) != n)
    throw InputError("metric: component matrix must match chart dimension");
  for (auto& row : comp_) {
    if (static_cast<int>(row.size()) != n)
      throw InputError("metric: component matrix must be square");
  }
  // Mirror the upper triangle and bind everything to the chart.
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (j >= i) {
        if (!comp_[i][j].valid())
          throw InputError("metric: missing upper-triangle component");
        comp_[i][j] = chart_.bind(comp_[i][j]);
      } else {
        comp_[i][j] = comp_[j][i];
      }
    }
  }
}

MetricPatch MetricPatch::make(Chart chart,
                              const std::vector<std::vector<std::string>>& sources) {
  std::vector<std::vector<Expr>> comp(sources.size());
  for (std::size_t i = 0; i < sources.size(); ++i) {
    comp[i].resize(sources[i].size());
    for (std::size_t j = 0; j < sources[i].size(); ++j) {
      if (j >= i) comp[i][j] = Expr::parse(sources[i][j]);
    }
  }
  return MetricPatch(std::move(chart), std::move(comp));
}

ScalarField ScalarField::make(const Chart& chart, const std::string& source) {
  return {chart, chart.bind(Expr::parse(source))};
}
ScalarField ScalarField::make(const Chart& chart, Expr e) {
  return {chart, chart.bind(e)};
}

VectorField VectorField::make(const Chart& chart,
                              const std::vector<std::string>& sources) {
  std::vector<Expr> comp;
  comp.reserve(sources.size());
  for (const std::string& s : sources) comp.push_back(chart.bind(Expr::parse(s)));
  if (static_cast<int>(comp.size()) != chart.dim())
    throw InputError("vector field: component count must match chart dimension");
  return {chart, std::move(comp)};
}
VectorField VectorField::make(const Chart& chart, std::vector<Expr> comp) {
  if (static_cast<int>(comp.size()) != chart.dim())
    throw InputError("vector field: component count must match chart dimension");
  for (Expr& e : comp) e = chart.bind(e);
  return {chart, std::move(comp)};
}

MetricFrame::MetricFrame(const MetricPatch& g, std::span<const double> p, int order)
    : n_(g.dim()), order_(order), point_(p.begin(), p.end()) {
  g.chart().require_admissible(p);
  seeds_ = seed_jets(p, order);
  Jet z = zero();
  g_ = jet_matrix(n_, z);
  for (int i = 0; i < n_; ++i)
    for (int j = 0; j < n_; ++j) g_[i][j] = g.component(i, j).eval(std::span<const Jet>(seeds_));
  if (!spd_values(g_))
    throw DomainError("metric is not positive definite at the sample point");
  ginv_ = invert(g_, z);
  dg_.assign(n_, jet_matrix(n_, z.truncated(std::max(order - 1, 0))));
  for (int i = 0; i < n_; ++i)
    for (int j = 0; j < n_; ++j)
      for (int l = 0; l < n_; ++l) dg_[i][j][l] = jet_partial(g_[i][j], l);
  gamma_.assign(n_, jet_matrix(n_, dg_[0][0][0]));
  for (int k = 0; k < n_; ++k) {
    for (int i = 0; i < n_; ++i) {
      for (int j = i; j < n_; ++j) {
        Jet s = Jet(dg_[0][0][0].space_ptr());
        for (int l = 0; l < n_; ++l)
          s = s + (dg_[j][l][i] + dg_[i][l][j] - dg_[i][j][l]) * ginv_[k][l];
        gamma_[k][i][j] = s * 0.5;
        gamma_[k][j][i] = gamma_[k][i][j];
      }
    }
  }
}

Jet MetricFrame::zero() const { return Jet(seeds_[0].space_ptr()); }
Jet MetricFrame::constant(double v) const {
  return Jet::constant(seeds_[0].space_ptr(), v);
}

Jet MetricFrame::eval(const Expr& e) const {
  return e.eval(std::span<const Jet>(seeds_));
}

JetVec MetricFrame::eval(const std::vector<Expr>& comps) const {
  JetVec v;
  v.reserve(comps.size());
  for (const Expr& e : comps) v.push_back(eval(e));
  return v;
}

JetTen4 MetricFrame::riemann_mixed() const {
  // [i][j][l][m]: component m of R(d_i, d_j) d_l
  //   = d_i Gamma^m_{jl} - d_j Gamma^m_{il} + G^m_{is} G^s_{jl} - G^m_{js} G^s_{il}
  Jet z = zero().truncated(std::max(order_ - 2, 0));
  JetTen4 r(n_, JetTen3(n_, jet_matrix(n_, z)));
  for (int i = 0; i < n_; ++i) {
    for (int j = 0; j < n_; ++j) {
      for (int l = 0; l < n_; ++l) {
        for (int m = 0; m < n_; ++m) {
          Jet s = jet_partial(gamma_[m][j][l], i) - jet_partial(gamma_[m][i][l], j);
          for (int k = 0; k < n_; ++k)
            s = s + gamma_[m][i][k] * gamma_[k][j][l] - gamma_[m][j][k] * gamma_[k][i][l];
          r[i][j][l][m] = s;
        }
      }
    }
  }
  return r;
}

JetTen4 MetricFrame::riemann_lowered() const {
  JetTen4 mixed = riemann_mixed();
  Jet z = zero().truncated(std::max(order_ - 2, 0));
  JetTen4 r(n_, JetTen3(n_, jet_matrix(n_, z)));
  for (int i = 0; i < n_; ++i)
    for (int j = 0; j < n_; ++j)
      for (int k = 0; k < n_; ++k)
        for (int l = 0; l < n_; ++l) {
          Jet s = z;
          for (int m = 0; m < n_; ++m) s = s + g_[k][m] * mixed[i][j][l][m];
          r[i][j][k][l] = s;
        }
  return r;
}

JetMat MetricFrame::ricci() const {
  JetTen4 mixed = riemann_mixed();
  Jet z = zero().truncated(std::max(order_ - 2, 0));
  JetMat s = jet_matrix(n_, z);
  for (int j = 0; j < n_; ++j)
    for (int l = 0; l < n_; ++l) {
      Jet acc = z;
      for (int i = 0; i < n_; ++i) acc = acc + mixed[i][j][l][i];
      s[j][l] = acc;
    }
  return s;
}

JetMat MetricFrame::ricci_operator() const {
  JetMat s = ricci();
  JetMat q = jet_matrix(n_, s[0][0]);
  for (int i = 0; i < n_; ++i)
    for (int j = 0; j < n_; ++j) {
      Jet acc = zero();
      for (int k = 0; k < n_; ++k) acc = acc + ginv_[i][k] * s[k][j];
      q[i][j] = acc;
    }
  return q;
}

Jet MetricFrame::scalar_curvature() const {
  JetMat s = ricci();
  Jet acc = zero();
  for (int i = 0; i < n_; ++i)
    for (int j = 0; j < n_; ++j) acc = acc + ginv_[i][j] * s[i][j];
  return acc;
}

JetVec MetricFrame::grad_covector(const Jet& f) const {
  JetVec df;
  df.reserve(n_);
  for (int i = 0; i < n_; ++i) df.push_back(jet_partial(f, i));
  return df;
}

JetVec MetricFrame::grad(const Jet& f) const { return raise(grad_covector(f)); }

JetMat MetricFrame::hessian(const Jet& f) const {
  JetVec df = grad_covector(f);
  Jet z = zero().truncated(std::max(f.order() - 2, 0));
  JetMat h = jet_matrix(n_, z);
  for (int i = 0; i < n_; ++i)
    for (int j = i; j < n_; ++j) {
      Jet s = jet_partial(df[j], i);
      for (int k = 0; k < n_; ++k) s = s - gamma_[k][i][j] * df[k];
      h[i][j] = s;
      h[j][i] = s;
    }
  return h;
}

Jet MetricFrame::laplacian(const Jet& f) const {
  JetMat h = hessian(f);
  Jet acc = zero();
  for (int i = 0; i < n_; ++i)
    for (int j = 0; j < n_; ++j) acc = acc + ginv_[i][j] * h[i][j];
  return acc;
}

JetMat MetricFrame::nabla_vector(const JetVec& x) const {
  JetMat nx = jet_matrix(n_, zero());
  for (int i = 0; i < n_; ++i)
    for (int j = 0; j < n_; ++j) {
      Jet s = jet_partial(x[i], j);
      for (int k = 0; k < n_; ++k) s = s + gamma_[i][j][k] * x[k];
      nx[i][j] = s;
    }
  return nx;
}

JetVec MetricFrame::covariant_acceleration(const JetVec& x) const {
  JetMat nx = nabla_vector(x);
  JetVec a(n_, zero());
  for (int i = 0; i < n_; ++i) {
    Jet s = zero();
    for (int j = 0; j < n_; ++j) s = s + x[j] * nx[i][j];
    a[i] = s;
  }
  return a;
}

Jet MetricFrame::norm2_vector(const JetVec& x) const {
  Jet s = zero();
  for (int i = 0; i < n_; ++i)
    for (int j = 0; j < n_; ++j) s = s + g_[i][j] * x[i] * x[j];
  return s;
}

Jet MetricFrame::norm2_mixed(const JetMat& a) const {
  // |A|^2 = g_{ik} g^{jl} A^i_j A^k_l
  Jet s = zero();
  for (int i = 0; i < n_; ++i)
    for (int j = 0; j < n_; ++j)
      for (int k = 0; k < n_; ++k)
        for (int l = 0; l < n_; ++l)
          s = s + g_[i][k] * ginv_[j][l] * a[i][j] * a[k][l];
  return s;
}

Jet MetricFrame::norm2_bilinear(const JetMat& t) const {
  return inner_bilinear(t, t);
}

Jet MetricFrame::inner_bilinear(const JetMat& s, const JetMat& t) const {
  Jet acc = zero();
  for (int i = 0; i < n_; ++i)
    for (int j = 0; j < n_; ++j)
      for (int k = 0; k < n_; ++k)
        for (int l = 0; l < n_; ++l)
          acc = acc + ginv_[i][k] * ginv_[j][l] * s[i][j] * t[k][l];
  return acc;
}

JetMat MetricFrame::lie_metric(const JetVec& x) const {
  JetMat nx = nabla_vector(x);
  JetMat lie = jet_matrix(n_, zero());
  for (int i = 0; i < n_; ++i)
    for (int j = 0; j < n_; ++j) {
      Jet s = zero();
      for (int k = 0; k < n_; ++k)
        s = s + g_[k][j] * nx[k][i] + g_[i][k] * nx[k][j];
      lie[i][j] = s;
    }
  return lie;
}

JetVec MetricFrame::lower(const JetVec& x) const {
  JetVec w(n_, zero());
  for (int i = 0; i < n_; ++i) {
    Jet s = zero();
    for (int j = 0; j < n_; ++j) s = s + g_[i][j] * x[j];
    w[i] = s;
  }
  return w;
}

JetVec MetricFrame::raise(const JetVec& w) const {
  JetVec x(n_, zero());
  for (int i = 0; i < n_; ++i) {
    Jet s = zero();
    for (int j = 0; j < n_; ++j) s = s + ginv_[i][j] * w[j];
    x[i] = s;
  }
  return x;
}

Jet MetricFrame::div_vector(const JetVec& x) const {
  Jet s = zero();
  for (int i = 0; i < n_; ++i) {
    s = s + jet_partial(x[i], i);
    for (int k = 0; k < n_; ++k) s = s + gamma_[i][i][k] * x[k];
  }
  return s;
}

Jet MetricFrame::div_oneform(const JetVec& w) const {
  Jet s = zero();
  for (int i = 0; i < n_; ++i)
    for (int j = 0; j < n_; ++j) {
      Jet cov = jet_partial(w[j], i);
      for (int k = 0; k < n_; ++k) cov = cov - gamma_[k][i][j] * w[k];
      s = s + ginv_[i][j] * cov;
    }
  return s;
}

JetVec MetricFrame::div_bilinear(const JetMat& t) const {
  Jet z = zero();
  JetVec d(n_, z);
  for (int j = 0; j < n_; ++j) {
    Jet s = z;
    for (int i = 0; i < n_; ++i)
      for (int k = 0; k < n_; ++k) {
        // (nabla_i T)_{kj}
        Jet cov = jet_partial(t[k][j], i);
        for (int l = 0; l < n_; ++l)
          cov = cov - gamma_[l][i][k] * t[l][j] - gamma_[l][i][j] * t[k][l];
        s = s + ginv_[i][k] * cov;
      }
    d[j] = s;
  }
  return d;
}

Jet MetricFrame::apply_vector(const JetVec& x, const Jet& f) const {
  Jet s = zero();
  for (int i = 0; i < n_; ++i) s = s + x[i] * jet_partial(f, i);
  return s;
}

// ------------------------------------------------------- pointwise wrappers

TensorValue jetmat_value(const MetricFrame& fr, const JetMat& m, std::string sig) {
  TensorValue t(fr.point(), std::move(sig), fr.dim());
  for (int i = 0; i < fr.dim(); ++i)
    for (int j = 0; j < fr.dim(); ++j) t(i, j) = m[i][j].value();
  return t;
}

TensorValue jetvec_value(const MetricFrame& fr, const JetVec& v, std::string sig) {
  TensorValue t(fr.point(), std::move(sig), fr.dim());
  for (int i = 0; i < fr.dim(); ++i) t(i) = v[i].value();
  return t;
}

TensorValue metric_at(const MetricPatch& g, std::span<const double> p) {
  MetricFrame fr(g, p, 2);
  return jetmat_value(fr, fr.metric(), "dd");
}

TensorValue inverse_metric_at(const MetricPatch& g, std::span<const double> p) {
  MetricFrame fr(g, p, 2);
  return jetmat_value(fr, fr.inverse_metric(), "uu");
}

TensorValue christoffel(const MetricPatch& g, std::span<const double> p) {
  MetricFrame fr(g, p, 2);
  TensorValue t(fr.point(), "udd", fr.dim());
  for (int k = 0; k < fr.dim(); ++k)
    for (int i = 0; i < fr.dim(); ++i)
      for (int j = 0; j < fr.dim(); ++j) t(k, i, j) = fr.christoffel()[k][i][j].value();
  return t;
}

TensorValue riemann(const MetricPatch& g, std::span<const double> p) {
  MetricFrame fr(g, p, 2);
  JetTen4 r = fr.riemann_mixed();
  TensorValue t(fr.point(), "dddu", fr.dim());
  for (int i = 0; i < fr.dim(); ++i)
    for (int j = 0; j < fr.dim(); ++j)
      for (int l = 0; l < fr.dim(); ++l)
        for (int m = 0; m < fr.dim(); ++m) t(i, j, l, m) = r[i][j][l][m].value();
  return t;
}

TensorValue riemann_lowered(const MetricPatch& g, std::span<const double> p) {
  MetricFrame fr(g, p, 2);
  JetTen4 r = fr.riemann_lowered();
  TensorValue t(fr.point(), "dddd", fr.dim());
  for (int i = 0; i < fr.dim(); ++i)
    for (int j = 0; j < fr.dim(); ++j)
      for (int k = 0; k < fr.dim(); ++k)
        for (int l = 0; l < fr.dim(); ++l) t(i, j, k, l) = r[i][j][k][l].value();
  return t;
}

TensorValue ricci(const MetricPatch& g, std::span<const double> p) {
  MetricFrame fr(g, p, 2);
  return jetmat_value(fr, fr.ricci(), "dd");
}

TensorValue ricci_operator(const MetricPatch& g, std::span<const double> p) {
  MetricFrame fr(g, p, 2);
  return jetmat_value(fr, fr.ricci_operator(), "ud");
}

double scalar_curvature(const MetricPatch& g, std::span<const double> p) {
  MetricFrame fr(g, p, 2);
  return fr.scalar_curvature().value();
}

TensorValue grad(const MetricPatch& g, const ScalarField& f, std::span<const double> p) {
  MetricFrame fr(g, p, 2);
  return jetvec_value(fr, fr.grad(fr.eval(f.expr)), "u");
}

TensorValue hessian(const MetricPatch& g, const ScalarField& f, std::span<const double> p) {
  MetricFrame fr(g, p, 2);
  return jetmat_value(fr, fr.hessian(fr.eval(f.expr)), "dd");
}

double laplacian(const MetricPatch& g, const ScalarField& f, std::span<const double> p) {
  MetricFrame fr(g, p, 2);
  return fr.laplacian(fr.eval(f.expr)).value();
}

TensorValue lie_derivative_metric(const MetricPatch& g, const VectorField& x,
                                  std::span<const double> p) {
  MetricFrame fr(g, p, 2);
  return jetmat_value(fr, fr.lie_metric(fr.eval(x.comp)), "dd");
}

TensorValue covariant_derivative_vector(const MetricPatch& g, const VectorField& x,
                                        std::span<const double> p) {
  MetricFrame fr(g, p, 2);
  return jetmat_value(fr, fr.nabla_vector(fr.eval(x.comp)), "ud");
}

std::pair<double, double> vector_field_norms(const MetricPatch& g, const VectorField& x,
                                             std::span<const double> p) {
  MetricFrame fr(g, p, 2);
  JetVec xv = fr.eval(x.comp);
  return {fr.norm2_vector(xv).value(), fr.norm2_mixed(fr.nabla_vector(xv)).value()};
}

double divergence_vector(const MetricPatch& g, const VectorField& x,
                         std::span<const double> p) {
  MetricFrame fr(g, p, 2);
  return fr.div_vector(fr.eval(x.comp)).value();
}

TensorValue divergence_oneform_of_scalar_gradient(const MetricPatch& g,
                                                  const ScalarField& f,
                                                  std::span<const double> p) {
  MetricFrame fr(g, p, 3);
  JetMat h = fr.hessian(fr.eval(f.expr));
  return jetvec_value(fr, fr.div_bilinear(h), "d");
}

std::pair<TensorValue, TensorValue> scalar_curvature_derivatives(
    const MetricPatch& g, std::span<const double> p, int order) {
  if (order < 4)
    throw OrderError("scalar-curvature derivatives need jet order >= 4");
  MetricFrame fr(g, p, order);
  Jet scal = fr.scalar_curvature();
  return {jetvec_value(fr, fr.grad(scal), "u"),
          jetmat_value(fr, fr.hessian(scal), "dd")};
}

}  // namespace qys

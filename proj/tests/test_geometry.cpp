#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "fd_oracle.hpp"
#include "qys/geometry.hpp"

using namespace qys;

namespace {

MetricPatch euclidean(int n) {
  std::vector<std::string> names;
  for (int i = 0; i < n; ++i) names.push_back("x" + std::to_string(i));
  Chart ch = Chart::make(names);
  std::vector<std::vector<std::string>> comp(n, std::vector<std::string>(n));
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) comp[i][j] = (i == j) ? "1" : "0";
  return MetricPatch::make(ch, comp);
}

MetricPatch hyp3() {
  Chart ch = Chart::make({"x", "y", "z"}, {"z"});
  return MetricPatch::make(ch, {{"z^(-2)", "0", "0"}, {"", "z^(-2)", "0"}, {"", "", "z^(-2)"}});
}

MetricPatch sph3() {
  // Unit round S^3 in stereographic coordinates: 4/(1+|u|^2)^2 * delta.
  Chart ch = Chart::make({"u", "v", "w"});
  std::string c = "4/(1+u^2+v^2+w^2)^2";
  return MetricPatch::make(ch, {{c, "0", "0"}, {"", c, "0"}, {"", "", c}});
}

MetricPatch sph2() {
  Chart ch = Chart::make({"u", "v"});
  std::string c = "4/(1+u^2+v^2)^2";
  return MetricPatch::make(ch, {{c, "0"}, {"", c}});
}

// Randomized smooth conformal metric e^(2 psi) delta on a box.
MetricPatch random_conformal(std::mt19937_64& rng, int n) {
  std::uniform_real_distribution<double> u(-0.4, 0.4);
  std::vector<std::string> names = {"x", "y", "z"};
  names.resize(n);
  std::ostringstream psi;
  psi << "exp(" << u(rng) << "*x";
  if (n > 1) psi << "+" << u(rng) << "*y";
  if (n > 2) psi << "+" << u(rng) << "*z*z";
  psi << ")";
  Chart ch = Chart::make(names);
  std::vector<std::vector<std::string>> comp(n, std::vector<std::string>(n, "0"));
  for (int i = 0; i < n; ++i) comp[i][i] = psi.str();
  return MetricPatch::make(ch, comp);
}

std::vector<double> random_point(std::mt19937_64& rng, int n, double lo, double hi) {
  std::uniform_real_distribution<double> u(lo, hi);
  std::vector<double> p(n);
  for (double& v : p) v = u(rng);
  return p;
}

double tol_scale(double eps, double scale) { return eps * (1.0 + scale); }

}  // namespace

TEST_CASE("flat space: trivial curvature and calculus on |x|^2/2") {
  MetricPatch g = euclidean(3);
  std::vector<double> p = {0.7, -1.2, 0.4};
  CHECK(christoffel(g, p).max_abs() == 0.0);
  CHECK(riemann(g, p).max_abs() == 0.0);
  CHECK(ricci(g, p).max_abs() == 0.0);
  CHECK(scalar_curvature(g, p) == 0.0);

  ScalarField f = ScalarField::make(g.chart(), "(x0^2+x1^2+x2^2)/2");
  TensorValue gr = grad(g, f, p);
  for (int i = 0; i < 3; ++i) CHECK(gr(i) == doctest::Approx(p[i]));
  TensorValue h = hessian(g, f, p);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) CHECK(h(i, j) == doctest::Approx(i == j ? 1.0 : 0.0));
  CHECK(laplacian(g, f, p) == doctest::Approx(3.0));

  // Constant field: everything vanishes.
  ScalarField c = ScalarField::make(g.chart(), "4");
  CHECK(grad(g, c, p).max_abs() == 0.0);
  CHECK(hessian(g, c, p).max_abs() == 0.0);
  CHECK(laplacian(g, c, p) == 0.0);
}

TEST_CASE("hyperbolic half-space metric, inverse, and domain gate") {
  MetricPatch g = hyp3();
  std::vector<double> p = {0.0, 0.0, 2.0};
  TensorValue m = metric_at(g, p);
  TensorValue mi = inverse_metric_at(g, p);
  for (int i = 0; i < 3; ++i) {
    CHECK(m(i, i) == doctest::Approx(0.25));
    CHECK(mi(i, i) == doctest::Approx(4.0));
  }
  // g * g^{-1} = I within 1e-12.
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      double s = 0;
      for (int k = 0; k < 3; ++k) s += m(i, k) * mi(k, j);
      CHECK(std::abs(s - (i == j ? 1.0 : 0.0)) < 1e-12);
    }
  std::vector<double> bad = {0.0, 0.0, 0.0};
  CHECK_THROWS_AS(metric_at(g, bad), DomainError);
}

TEST_CASE("a non positive definite metric is rejected") {
  Chart ch = Chart::make({"x", "y"});
  MetricPatch g = MetricPatch::make(ch, {{"-1", "0"}, {"", "1"}});
  std::vector<double> p = {0.0, 0.0};
  CHECK_THROWS_AS(metric_at(g, p), DomainError);
}

TEST_CASE("hyperbolic Christoffel symbols at unit height") {
  MetricPatch g = hyp3();
  std::vector<double> p = {0.0, 0.0, 1.0};
  TensorValue gam = christoffel(g, p);
  const int x = 0, y = 1, z = 2;
  CHECK(gam(z, x, x) == doctest::Approx(1.0));
  CHECK(gam(z, y, y) == doctest::Approx(1.0));
  CHECK(gam(z, z, z) == doctest::Approx(-1.0));
  CHECK(gam(x, x, z) == doctest::Approx(-1.0));
  CHECK(gam(x, z, x) == doctest::Approx(-1.0));
  CHECK(gam(y, y, z) == doctest::Approx(-1.0));
  double sum = 0;
  for (int k = 0; k < 3; ++k)
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) sum += std::abs(gam(k, i, j));
  CHECK(sum == doctest::Approx(7.0));  // the seven entries above, nothing else
}

TEST_CASE("stereographic sphere chart has critical conformal factor at origin") {
  MetricPatch g = sph2();
  std::vector<double> p = {0.0, 0.0};
  CHECK(christoffel(g, p).max_abs() < 1e-14);
}

TEST_CASE("space forms: sectional curvature, Ricci, scalar") {
  std::mt19937_64 rng(5);
  SUBCASE("hyperbolic: K = -1, S = -2g, scal = -6") {
    MetricPatch g = hyp3();
    for (int t = 0; t < 6; ++t) {
      std::vector<double> p = random_point(rng, 3, 0.2, 3.0);
      p[0] = p[0] - 1.5;
      p[1] = p[1] - 1.5;
      TensorValue rl = riemann_lowered(g, p);
      TensorValue m = metric_at(g, p);
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
          double expect = -(m(i, i) * m(j, j) - m(i, j) * m(i, j));
          CHECK(std::abs(rl(i, j, i, j) - expect) < 1e-9);
        }
      TensorValue s = ricci(g, p);
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) CHECK(std::abs(s(i, j) + 2.0 * m(i, j)) < 1e-9);
      CHECK(std::abs(scalar_curvature(g, p) + 6.0) < 1e-9);
    }
  }
  SUBCASE("round sphere: K = +1, S = 2g, scal = +6") {
    MetricPatch g = sph3();
    for (int t = 0; t < 6; ++t) {
      std::vector<double> p = random_point(rng, 3, -1.2, 1.2);
      TensorValue rl = riemann_lowered(g, p);
      TensorValue m = metric_at(g, p);
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
          double expect = m(i, i) * m(j, j) - m(i, j) * m(i, j);
          CHECK(std::abs(rl(i, j, i, j) - expect) < 1e-9);
        }
      TensorValue s = ricci(g, p);
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) CHECK(std::abs(s(i, j) - 2.0 * m(i, j)) < 1e-9);
      CHECK(std::abs(scalar_curvature(g, p) - 6.0) < 1e-9);
    }
  }
}

TEST_CASE("Riemann symmetries, Bianchi, and metric compatibility on random metrics") {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 10; ++trial) {
    int n = 2 + trial % 2;
    MetricPatch g = random_conformal(rng, n);
    std::vector<double> p = random_point(rng, n, -1.0, 1.0);
    MetricFrame fr(g, p, 3);
    JetTen4 r = fr.riemann_lowered();
    double scale = 0;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k)
          for (int l = 0; l < n; ++l)
            scale = std::max(scale, std::abs(r[i][j][k][l].value()));
    double tol = 1e-9 * (1.0 + scale);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k)
          for (int l = 0; l < n; ++l) {
            double v = r[i][j][k][l].value();
            CHECK(std::abs(v + r[j][i][k][l].value()) < tol);
            CHECK(std::abs(v + r[i][j][l][k].value()) < tol);
            CHECK(std::abs(v - r[k][l][i][j].value()) < tol);
            CHECK(std::abs(v + r[i][k][l][j].value() + r[i][l][j][k].value()) < tol);
          }
    // nabla g = 0 componentwise.
    const JetMat& gm = fr.metric();
    const JetTen3& gam = fr.christoffel();
    for (int l = 0; l < n; ++l)
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
          Jet cov = jet_partial(gm[i][j], l);
          for (int k = 0; k < n; ++k)
            cov = cov - gam[k][l][i] * gm[k][j] - gam[k][l][j] * gm[i][k];
          CHECK(std::abs(cov.value()) < 1e-10 * (1.0 + scale));
        }
  }
}

TEST_CASE("gradient/Hessian/Laplacian on the hyperbolic potential") {
  MetricPatch g = hyp3();
  ScalarField f = ScalarField::make(g.chart(), "-ln(z)");
  std::vector<double> p = {0.0, 0.0, 1.0};
  TensorValue gr = grad(g, f, p);
  CHECK(gr(0) == doctest::Approx(0.0));
  CHECK(gr(1) == doctest::Approx(0.0));
  CHECK(gr(2) == doctest::Approx(-1.0));
  TensorValue h = hessian(g, f, p);
  CHECK(h(0, 0) == doctest::Approx(1.0));
  CHECK(h(1, 1) == doctest::Approx(1.0));
  CHECK(h(2, 2) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(laplacian(g, f, p) == doctest::Approx(2.0));
  // Hessian symmetry within 1e-11.
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) CHECK(std::abs(h(i, j) - h(j, i)) < 1e-11);
}

TEST_CASE("Lie derivative of the metric") {
  std::mt19937_64 rng(23);
  SUBCASE("L_{grad f} g = 2 Hess f on hyperbolic samples") {
    MetricPatch g = hyp3();
    ScalarField f = ScalarField::make(g.chart(), "x*exp(y)-ln(z)");
    for (int t = 0; t < 10; ++t) {
      std::vector<double> p = random_point(rng, 3, 0.3, 2.0);
      MetricFrame fr(g, p, 3);
      Jet fj = fr.eval(f.expr);
      JetMat lie = fr.lie_metric(fr.grad(fj));
      JetMat hess = fr.hessian(fj);
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
          CHECK(std::abs(lie[i][j].value() - 2.0 * hess[i][j].value()) < 1e-9);
    }
  }
  SUBCASE("flat space: constant field kills, position field doubles") {
    MetricPatch g = euclidean(3);
    std::vector<double> p = {0.4, 1.1, -0.2};
    VectorField cst = VectorField::make(g.chart(), {"3", "-1", "2"});
    CHECK(lie_derivative_metric(g, cst, p).max_abs() == 0.0);
    VectorField pos = VectorField::make(g.chart(), {"x0", "x1", "x2"});
    TensorValue lie = lie_derivative_metric(g, pos, p);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        CHECK(lie(i, j) == doctest::Approx(i == j ? 2.0 : 0.0));
  }
}

TEST_CASE("covariant derivative and field norms") {
  SUBCASE("flat position field") {
    MetricPatch g = euclidean(3);
    std::vector<double> p = {1.0, 2.0, 3.0};
    VectorField pos = VectorField::make(g.chart(), {"x0", "x1", "x2"});
    TensorValue nx = covariant_derivative_vector(g, pos, p);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) CHECK(nx(i, j) == doctest::Approx(i == j ? 1.0 : 0.0));
    auto [n2, dn2] = vector_field_norms(g, pos, p);
    CHECK(n2 == doctest::Approx(14.0));
    CHECK(dn2 == doctest::Approx(3.0));
  }
  SUBCASE("hyperbolic -z d/dz") {
    MetricPatch g = hyp3();
    std::vector<double> p = {0.0, 0.0, 1.0};
    VectorField xi = VectorField::make(g.chart(), {"0", "0", "-z"});
    auto [n2, dn2] = vector_field_norms(g, xi, p);
    CHECK(n2 == doctest::Approx(1.0));
    CHECK(dn2 == doctest::Approx(2.0));
  }
  SUBCASE("zero field") {
    MetricPatch g = hyp3();
    std::vector<double> p = {0.1, 0.2, 0.8};
    VectorField zero = VectorField::make(g.chart(), {"0", "0", "0"});
    auto [n2, dn2] = vector_field_norms(g, zero, p);
    CHECK(n2 == 0.0);
    CHECK(dn2 == 0.0);
    CHECK(covariant_derivative_vector(g, zero, p).max_abs() == 0.0);
  }
}

TEST_CASE("divergence identities") {
  std::mt19937_64 rng(31);
  SUBCASE("div(grad f) = lap(f) on hyperbolic samples") {
    MetricPatch g = hyp3();
    ScalarField f = ScalarField::make(g.chart(), "sin(x)*y+z^2");
    for (int t = 0; t < 8; ++t) {
      std::vector<double> p = random_point(rng, 3, 0.3, 2.0);
      MetricFrame fr(g, p, 3);
      Jet fj = fr.eval(f.expr);
      double d = fr.div_vector(fr.grad(fj)).value();
      double l = fr.laplacian(fj).value();
      CHECK(std::abs(d - l) < 1e-9 * (1.0 + std::abs(l)));
    }
  }
  SUBCASE("contracted Bianchi: div S = d(scal)/2") {
    for (const MetricPatch& g : {hyp3(), sph3()}) {
      for (int t = 0; t < 5; ++t) {
        std::vector<double> p = random_point(rng, 3, 0.4, 1.4);
        MetricFrame fr(g, p, 4);
        JetVec div_s = fr.div_bilinear(fr.ricci());
        Jet scal = fr.scalar_curvature();
        for (int j = 0; j < 3; ++j) {
          double lhs = div_s[j].value();
          double rhs = 0.5 * jet_partial(scal, j).value();
          CHECK(std::abs(lhs - rhs) < 1e-8);
        }
      }
    }
  }
  SUBCASE("div of the zero tensor") {
    MetricPatch g = hyp3();
    std::vector<double> p = {0.0, 0.0, 1.0};
    MetricFrame fr(g, p, 3);
    JetMat zero(3, JetVec(3, fr.zero()));
    JetVec d = fr.div_bilinear(zero);
    for (int j = 0; j < 3; ++j) CHECK(d[j].value() == 0.0);
  }
}

TEST_CASE("Bochner lemmas and the traceless-Hessian identity on random data") {
  std::mt19937_64 rng(41);
  const std::vector<std::string> potentials = {
      "x+sin(y)", "exp(0.3*x)*y", "x*y+0.5*y*y", "cos(x)+0.2*x*y"};
  for (int trial = 0; trial < 8; ++trial) {
    MetricPatch g = random_conformal(rng, 2);
    ScalarField f = ScalarField::make(g.chart(), potentials[trial % potentials.size()]);
    std::vector<double> p = random_point(rng, 2, -1.0, 1.0);
    MetricFrame fr(g, p, 4);
    int n = 2;
    Jet fj = fr.eval(f.expr);
    JetMat hess = fr.hessian(fj);
    JetVec xi = fr.grad(fj);

    // Lemma A: div(Hess f) = d(lap f) + S(grad f, .) as covectors.
    JetVec lhs_a = fr.div_bilinear(hess);
    Jet lap = fr.laplacian(fj);
    JetMat ric = fr.ricci();
    for (int j = 0; j < n; ++j) {
      double rhs = jet_partial(lap, j).value();
      for (int k = 0; k < n; ++k) rhs += ric[j][k].value() * xi[k].value();
      CHECK(std::abs(lhs_a[j].value() - rhs) < 1e-8);
    }

    // Lemma B: (div Hess f)(xi) = lap(|xi|^2)/2 - |nabla xi|^2.
    double lhs_b = 0;
    for (int j = 0; j < n; ++j) lhs_b += lhs_a[j].value() * xi[j].value();
    Jet xi2 = fr.norm2_vector(xi);
    double rhs_b = 0.5 * fr.laplacian(xi2).value() -
                   fr.norm2_mixed(fr.nabla_vector(xi)).value();
    CHECK(std::abs(lhs_b - rhs_b) < 1e-8);

    // |Hess f - (lap f / n) g|^2 = |Hess f|^2 - (lap f)^2 / n.
    JetMat traceless = hess;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        traceless[i][j] = hess[i][j] - (lap / static_cast<double>(n)) * fr.metric()[i][j];
    double lhs_t = fr.norm2_bilinear(traceless).value();
    double rhs_t = fr.norm2_bilinear(hess).value() -
                   lap.value() * lap.value() / n;
    CHECK(std::abs(lhs_t - rhs_t) < 1e-10 * (1.0 + std::abs(rhs_t)));
  }
}

TEST_CASE("derivatives of the scalar curvature field") {
  SUBCASE("space forms have vanishing grad and Hess of scal") {
    std::mt19937_64 rng(53);
    for (const MetricPatch& g : {euclidean(3), hyp3(), sph3()}) {
      std::vector<double> p = random_point(rng, 3, 0.4, 1.2);
      auto [gs, hs] = scalar_curvature_derivatives(g, p);
      CHECK(gs.max_abs() < 1e-8);
      CHECK(hs.max_abs() < 1e-7);
    }
  }
  SUBCASE("matches finite differences on a non-homogeneous metric") {
    Chart ch = Chart::make({"x", "y"});
    MetricPatch g = MetricPatch::make(ch, {{"1+x^2", "0"}, {"", "1+x^2"}});
    std::vector<double> p = {0.3, -0.7};
    auto [gs, hs] = scalar_curvature_derivatives(g, p);
    testing::RealFn scal_fn = [&](const std::vector<double>& q) {
      return scalar_curvature(g, q);
    };
    TensorValue mi = inverse_metric_at(g, p);
    for (int i = 0; i < 2; ++i) {
      double d = 0;
      for (int j = 0; j < 2; ++j) d += mi(i, j) * testing::fd_first(scal_fn, p, j);
      CHECK(std::abs(gs(i) - d) < 1e-5 * (1.0 + std::abs(d)));
    }
  }
  SUBCASE("warped line x sphere closed form") {
    // g = dt^2 + e^{2t} g_{S^2}; scal = 2 e^{-2t} - 6, d scal/dt = -4 e^{-2t}.
    Chart ch = Chart::make({"t", "u", "v"});
    std::string s = "exp(2*t)*4/(1+u^2+v^2)^2";
    MetricPatch g = MetricPatch::make(ch, {{"1", "0", "0"}, {"", s, "0"}, {"", "", s}});
    for (double t : {-1.0, 0.0, 1.0}) {
      std::vector<double> p = {t, 0.2, -0.3};
      CHECK(std::abs(scalar_curvature(g, p) - (2.0 * std::exp(-2.0 * t) - 6.0)) < 1e-8);
    }
    std::vector<double> p0 = {0.0, 0.1, 0.4};
    auto [gs, hs] = scalar_curvature_derivatives(g, p0);
    CHECK(gs(0) == doctest::Approx(-4.0));  // g^{tt} = 1
    CHECK(std::abs(gs(1)) < 1e-8);
    CHECK(std::abs(gs(2)) < 1e-8);
  }
  SUBCASE("order below 4 is rejected") {
    MetricPatch g = euclidean(2);
    std::vector<double> p = {0.0, 0.0};
    CHECK_THROWS_AS(scalar_curvature_derivatives(g, p, 3), OrderError);
  }
}

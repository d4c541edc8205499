#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "fd_oracle.hpp"
#include "qys/jet.hpp"

using namespace qys;

namespace {

Jet random_jet(std::mt19937_64& rng, std::shared_ptr<const JetSpace> space) {
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  Jet j(space);
  for (int pos = 0; pos < space->size(); ++pos) j.raw(pos) = u(rng);
  return j;
}

double rel_gap(double a, double b) {
  return std::abs(a - b) / (1.0 + std::max(std::abs(a), std::abs(b)));
}

}  // namespace

TEST_CASE("jet space enumeration is graded and self-consistent") {
  auto sp = JetSpace::get(3, 4);
  CHECK(sp->size() == 35);  // C(3+4,4)
  for (int pos = 0; pos < sp->size(); ++pos) {
    CHECK(sp->position(sp->index(pos)) == pos);
    if (pos > 0) CHECK(sp->degree(pos) >= sp->degree(pos - 1));
  }
  CHECK(sp->position({5, 0, 0}) == -1);
}

TEST_CASE("jets form a commutative ring to machine precision") {
  std::mt19937_64 rng(7);
  auto sp = JetSpace::get(3, 4);
  for (int trial = 0; trial < 50; ++trial) {
    Jet a = random_jet(rng, sp), b = random_jet(rng, sp), c = random_jet(rng, sp);
    Jet add_sub = (a + b) - b;
    Jet comm = a * b - b * a;
    Jet assoc = (a * b) * c - a * (b * c);
    Jet distrib = a * (b + c) - (a * b + a * c);
    for (int pos = 0; pos < sp->size(); ++pos) {
      CHECK(rel_gap(add_sub.raw(pos), a.raw(pos)) < 1e-12);
      CHECK(std::abs(comm.raw(pos)) < 1e-12);
      CHECK(std::abs(assoc.raw(pos)) < 1e-10);
      CHECK(std::abs(distrib.raw(pos)) < 1e-10);
    }
  }
}

TEST_CASE("variable seeds carry exact first-order structure") {
  auto sp = JetSpace::get(2, 2);
  Jet x = Jet::variable(sp, 0, 2.0);
  Jet y = Jet::variable(sp, 1, 0.0);
  Jet p = x * jet_sin(y);
  CHECK(p.value() == doctest::Approx(0.0));
  CHECK(p.derivative({1, 0}) == doctest::Approx(0.0));
  CHECK(p.derivative({0, 1}) == doctest::Approx(2.0));
  CHECK(p.coeff({1, 1}) == doctest::Approx(1.0));
  CHECK(p.derivative({0, 2}) == doctest::Approx(0.0));
}

TEST_CASE("exp at 0 has unit derivatives of every order") {
  auto sp = JetSpace::get(1, 4);
  Jet e = jet_exp(Jet::variable(sp, 0, 0.0));
  CHECK(e.derivative({4}) == doctest::Approx(1.0));
  CHECK(e.derivative({3}) == doctest::Approx(1.0));
}

TEST_CASE("requesting a coefficient beyond the order fails") {
  auto sp = JetSpace::get(1, 2);
  Jet x = Jet::variable(sp, 0, 1.0);
  CHECK_THROWS_AS((void)x.coeff({3}), OrderError);
}

TEST_CASE("chain rule: exp(ln(x)) reproduces x through order 4") {
  auto sp = JetSpace::get(1, 4);
  for (double v : {0.5, 1.0, 3.7}) {
    Jet x = Jet::variable(sp, 0, v);
    Jet roundtrip = jet_exp(jet_ln(x));
    for (int pos = 0; pos < sp->size(); ++pos)
      CHECK(rel_gap(roundtrip.raw(pos), x.raw(pos)) < 1e-12);
  }
}

TEST_CASE("elementary functions match the finite-difference oracle") {
  using testing::fd_first;
  using testing::fd_second;
  auto sp = JetSpace::get(2, 2);
  struct Case {
    const char* name;
    std::function<Jet(const Jet&, const Jet&)> jf;
    std::function<double(double, double)> rf;
  };
  std::vector<Case> cases = {
      {"exp(x)*sin(y)", [](const Jet& x, const Jet& y) { return jet_exp(x) * jet_sin(y); },
       [](double x, double y) { return std::exp(x) * std::sin(y); }},
      {"ln(x+3)/cosh(y)", [](const Jet& x, const Jet& y) { return jet_ln(x + 3.0) / jet_cosh(y); },
       [](double x, double y) { return std::log(x + 3.0) / std::cosh(y); }},
      {"sqrt(x+2)*tanh(y)", [](const Jet& x, const Jet& y) { return jet_sqrt(x + 2.0) * jet_tanh(y); },
       [](double x, double y) { return std::sqrt(x + 2.0) * std::tanh(y); }},
      {"tan(x/4)+sinh(y)", [](const Jet& x, const Jet& y) { return jet_tan(x * 0.25) + jet_sinh(y); },
       [](double x, double y) { return std::tan(x / 4.0) + std::sinh(y); }},
      {"x^2.5", [](const Jet& x, const Jet& y) { return jet_pow(x + 2.0, 2.5) + 0.0 * y; },
       [](double x, double y) { return std::pow(x + 2.0, 2.5) + 0.0 * y; }},
  };
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-0.8, 0.8);
  for (const auto& cs : cases) {
    for (int trial = 0; trial < 5; ++trial) {
      double px = u(rng), py = u(rng);
      Jet jx = Jet::variable(sp, 0, px);
      Jet jy = Jet::variable(sp, 1, py);
      Jet val = cs.jf(jx, jy);
      testing::RealFn f = [&](const std::vector<double>& p) { return cs.rf(p[0], p[1]); };
      CAPTURE(cs.name);
      CHECK(rel_gap(val.derivative({1, 0}), fd_first(f, {px, py}, 0)) < 1e-6);
      CHECK(rel_gap(val.derivative({0, 1}), fd_first(f, {px, py}, 1)) < 1e-6);
      CHECK(rel_gap(val.derivative({2, 0}), fd_second(f, {px, py}, 0, 0)) < 1e-5);
      CHECK(rel_gap(val.derivative({1, 1}), fd_second(f, {px, py}, 0, 1)) < 1e-5);
    }
  }
}

TEST_CASE("integer powers allow any base; fractional powers do not") {
  auto sp = JetSpace::get(1, 3);
  Jet x = Jet::variable(sp, 0, -2.0);
  CHECK(jet_pow(x, 2.0).value() == doctest::Approx(4.0));
  CHECK(jet_pow(x, 3.0).value() == doctest::Approx(-8.0));
  CHECK(jet_pow(x, -2.0).value() == doctest::Approx(0.25));
  CHECK_THROWS_AS(jet_pow(x, 0.5), DomainError);
  CHECK_THROWS_AS(jet_ln(x), DomainError);
  CHECK_THROWS_AS(jet_sqrt(x), DomainError);
}

TEST_CASE("partial derivative shifts coefficients and drops one order") {
  auto sp = JetSpace::get(2, 3);
  Jet x = Jet::variable(sp, 0, 1.5);
  Jet y = Jet::variable(sp, 1, -0.5);
  Jet fxy = x * x * y + jet_sin(y);
  Jet dx = jet_partial(fxy, 0);
  CHECK(dx.order() == 2);
  CHECK(dx.value() == doctest::Approx(2.0 * 1.5 * -0.5));
  CHECK(dx.derivative({1, 0}) == doctest::Approx(2.0 * -0.5));
  CHECK(dx.derivative({0, 1}) == doctest::Approx(2.0 * 1.5));
  Jet dy = jet_partial(fxy, 1);
  CHECK(dy.value() == doctest::Approx(1.5 * 1.5 + std::cos(-0.5)));
}

TEST_CASE("division by a jet matches multiplication by its reciprocal") {
  std::mt19937_64 rng(3);
  auto sp = JetSpace::get(2, 4);
  for (int trial = 0; trial < 20; ++trial) {
    Jet a = random_jet(rng, sp);
    Jet b = random_jet(rng, sp);
    if (std::abs(b.value()) < 0.3) b = b + 1.0;
    Jet q = a / b;
    Jet back = q * b;
    for (int pos = 0; pos < sp->size(); ++pos)
      CHECK(rel_gap(back.raw(pos), a.raw(pos)) < 1e-9);
  }
}

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>
#include <string>
#include <vector>

#include "qys/chart.hpp"
#include "qys/expr.hpp"

using namespace qys;

namespace {

const std::vector<std::string> kNames = {"x", "y", "z"};

double eval_xyz(const std::string& src, double x, double y, double z) {
  Expr e = Expr::parse(src).bind(kNames);
  double p[3] = {x, y, z};
  return e.eval(std::span<const double>(p, 3));
}

// Random AST generator for the round-trip property.
Expr random_expr(std::mt19937_64& rng, int depth) {
  std::uniform_int_distribution<int> pick(0, depth <= 0 ? 2 : 8);
  std::uniform_real_distribution<double> lit(-5.0, 5.0);
  std::uniform_int_distribution<int> coord(0, 2);
  std::uniform_int_distribution<int> fn(0, 8);
  switch (pick(rng)) {
    case 0: return Expr::literal(lit(rng));
    case 1: return Expr::coord(kNames[coord(rng)]);
    case 2: return Expr::pi();
    case 3: return -random_expr(rng, depth - 1);
    case 4: return Expr::apply(static_cast<Func>(fn(rng)), random_expr(rng, depth - 1));
    case 5: return random_expr(rng, depth - 1) + random_expr(rng, depth - 1);
    case 6: return random_expr(rng, depth - 1) - random_expr(rng, depth - 1);
    case 7: return random_expr(rng, depth - 1) * random_expr(rng, depth - 1);
    default: return random_expr(rng, depth - 1) / random_expr(rng, depth - 1);
  }
}

}  // namespace

TEST_CASE("grammar shape of the worked examples") {
  Expr e = Expr::parse("z^(-2)");
  const ExprNode& n = e.root();
  REQUIRE(n.kind == ExprNode::Kind::Bin);
  CHECK(n.op == BinOp::Pow);
  CHECK(n.a->kind == ExprNode::Kind::Coord);
  CHECK(n.a->name == "z");
  REQUIRE(n.b->kind == ExprNode::Kind::Lit);
  CHECK(n.b->lit == -2.0);

  Expr f = Expr::parse("-ln(z)");
  const ExprNode& m = f.root();
  REQUIRE(m.kind == ExprNode::Kind::Neg);
  REQUIRE(m.a->kind == ExprNode::Kind::Apply);
  CHECK(m.a->func == Func::Ln);
  CHECK(m.a->a->kind == ExprNode::Kind::Coord);
}

TEST_CASE("power is right-associative and binds above unary minus") {
  CHECK(eval_xyz("2^3^2", 0, 0, 0) == doctest::Approx(512.0));
  CHECK(eval_xyz("-2^2", 0, 0, 0) == doctest::Approx(-4.0));
  CHECK(eval_xyz("2*3^2", 0, 0, 0) == doctest::Approx(18.0));
  CHECK(eval_xyz("2+3*4", 0, 0, 0) == doctest::Approx(14.0));
  CHECK(eval_xyz("(2+3)*4", 0, 0, 0) == doctest::Approx(20.0));
  CHECK(eval_xyz("2-3-4", 0, 0, 0) == doctest::Approx(-5.0));
  CHECK(eval_xyz("x^-2", 2, 0, 0) == doctest::Approx(0.25));
}

TEST_CASE("syntax errors carry a byte offset") {
  CHECK_THROWS_AS(Expr::parse(""), SyntaxError);
  CHECK_THROWS_AS(Expr::parse("   "), SyntaxError);
  CHECK_THROWS_AS(Expr::parse("2x"), SyntaxError);  // no implicit multiplication
  CHECK_THROWS_AS(Expr::parse("(x+y"), SyntaxError);
  CHECK_THROWS_AS(Expr::parse("x++"), SyntaxError);
  CHECK_THROWS_AS(Expr::parse("sin x"), SyntaxError);
  try {
    Expr::parse("x+*y");
  } catch (const SyntaxError& e) {
    CHECK(e.offset == 2);
    CHECK(std::string(e.what()).find("expected") != std::string::npos);
  }
}

TEST_CASE("unresolved coordinate names are binding errors") {
  Expr e = Expr::parse("x+w");
  CHECK_THROWS_AS(e.bind(kNames), BindError);
  // Unbound evaluation is also rejected, never a silent zero.
  double p[3] = {1, 2, 3};
  CHECK_THROWS_AS(Expr::parse("x").eval(std::span<const double>(p, 3)), BindError);
}

TEST_CASE("print/parse round trip is structurally exact") {
  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 300; ++trial) {
    Expr e = random_expr(rng, 5);
    std::string s = e.str();
    CAPTURE(s);
    Expr back = Expr::parse(s);
    CHECK(back.same_structure(e));
    CHECK(Expr::parse(back.str()).same_structure(back));
  }
}

TEST_CASE("jet evaluation of bound expressions") {
  Chart ch = Chart::make({"x", "y"});
  Expr e = ch.bind(Expr::parse("x*sin(y)"));
  double p[2] = {2.0, 0.0};
  Jet j = eval_jet(e, ch, std::span<const double>(p, 2), 2);
  CHECK(j.value() == doctest::Approx(0.0));
  CHECK(j.derivative({1, 0}) == doctest::Approx(0.0));
  CHECK(j.derivative({0, 1}) == doctest::Approx(2.0));
  CHECK(j.coeff({1, 1}) == doctest::Approx(1.0));
  CHECK(j.derivative({0, 2}) == doctest::Approx(0.0));
}

TEST_CASE("annihilation: x + 0*y has exactly zero y-derivative") {
  Chart ch = Chart::make({"x", "y"});
  Expr e = ch.bind(Expr::parse("x+0*y"));
  double p[2] = {1.3, -2.4};
  Jet j = eval_jet(e, ch, std::span<const double>(p, 2), 1);
  CHECK(j.derivative({0, 1}) == 0.0);
  CHECK(j.derivative({1, 0}) == 1.0);
}

TEST_CASE("domain errors name the offending subexpression") {
  Chart ch = Chart::make({"z"});
  Expr e = ch.bind(Expr::parse("ln(z)"));
  double p[1] = {-1.0};
  try {
    e.eval(std::span<const double>(p, 1));
    FAIL("expected DomainError");
  } catch (const DomainError& err) {
    CHECK(std::string(err.what()).find("ln(z)") != std::string::npos);
  }
  Expr d = ch.bind(Expr::parse("1/(z+1)"));
  CHECK_THROWS_AS(d.eval(std::span<const double>(p, 1)), DomainError);
}

TEST_CASE("pi is a named constant") {
  CHECK(eval_xyz("sin(pi)", 0, 0, 0) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(eval_xyz("cos(2*pi)", 0, 0, 0) == doctest::Approx(1.0));
}

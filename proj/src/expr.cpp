#include "qys/expr.hpp"

#include <cctype>
#include <cmath>
#include <numbers>
#include <cstdlib>
#include <map>
#include <sstream>
#include <vector>

namespace qys {

namespace {

ExprNodePtr make_node(ExprNode n) {
  return std::make_shared<const ExprNode>(std::move(n));
}

const std::map<std::string, Func, std::less<>> kFuncs = {
    {"exp", Func::Exp},   {"ln", Func::Ln},     {"sin", Func::Sin},
    {"cos", Func::Cos},   {"tan", Func::Tan},   {"sinh", Func::Sinh},
    {"cosh", Func::Cosh}, {"tanh", Func::Tanh}, {"sqrt", Func::Sqrt}};

// ---------------------------------------------------------------- parser

class Parser {
 public:
  explicit Parser(std::string_view src) : src_(src) {}

  ExprNodePtr parse() {
    skip_ws();
    if (pos_ >= src_.size())
      throw SyntaxError("empty expression; expected a term", pos_);
    ExprNodePtr e = parse_sum();
    skip_ws();
    if (pos_ < src_.size())
      fail("end of input or an operator (+ - * / ^)");
    return e;
  }

 private:
  std::string_view src_;
  std::size_t pos_ = 0;

  [[noreturn]] void fail(const std::string& expected) {
    std::ostringstream os;
    os << "syntax error at byte " << pos_ << ": expected " << expected;
    if (pos_ < src_.size()) os << ", found '" << src_[pos_] << "'";
    else os << ", found end of input";
    throw SyntaxError(os.str(), pos_);
  }

  void skip_ws() {
    while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
  }

  bool eat(char c) {
    skip_ws();
    if (pos_ < src_.size() && src_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  char peek() {
    skip_ws();
    return pos_ < src_.size() ? src_[pos_] : '\0';
  }

  ExprNodePtr parse_sum() {
    ExprNodePtr e = parse_term();
    for (;;) {
      if (eat('+')) {
        e = make_node({.kind = ExprNode::Kind::Bin, .op = BinOp::Add, .a = e, .b = parse_term()});
      } else if (eat('-')) {
        e = make_node({.kind = ExprNode::Kind::Bin, .op = BinOp::Sub, .a = e, .b = parse_term()});
      } else {
        return e;
      }
    }
  }

  ExprNodePtr parse_term() {
    ExprNodePtr e = parse_unary();
    for (;;) {
      if (eat('*')) {
        e = make_node({.kind = ExprNode::Kind::Bin, .op = BinOp::Mul, .a = e, .b = parse_unary()});
      } else if (eat('/')) {
        e = make_node({.kind = ExprNode::Kind::Bin, .op = BinOp::Div, .a = e, .b = parse_unary()});
      } else {
        return e;
      }
    }
  }

  ExprNodePtr parse_unary() {
    if (eat('-')) {
      ExprNodePtr inner = parse_unary();
      // Fold a negated literal into the literal itself, so that "z^(-2)"
      // carries Lit(-2) rather than Neg(Lit(2)).
      if (inner->kind == ExprNode::Kind::Lit)
        return make_node({.kind = ExprNode::Kind::Lit, .lit = -inner->lit});
      return make_node({.kind = ExprNode::Kind::Neg, .a = inner});
    }
    return parse_power();
  }

  ExprNodePtr parse_power() {
    ExprNodePtr base = parse_atom();
    if (eat('^')) {
      ExprNodePtr expo = parse_unary();  // right-associative
      return make_node({.kind = ExprNode::Kind::Bin, .op = BinOp::Pow, .a = base, .b = expo});
    }
    return base;
  }

  ExprNodePtr parse_atom() {
    skip_ws();
    if (pos_ >= src_.size()) fail("a number, name, or '('");
    char c = src_[pos_];
    if (c == '(') {
      ++pos_;
      ExprNodePtr e = parse_sum();
      if (!eat(')')) fail("')'");
      return e;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return parse_name();
    fail("a number, name, or '('");
  }

  ExprNodePtr parse_number() {
    const char* begin = src_.data() + pos_;
    char* end = nullptr;
    double v = std::strtod(begin, &end);
    if (end == begin) fail("a numeric literal");
    pos_ += static_cast<std::size_t>(end - begin);
    return make_node({.kind = ExprNode::Kind::Lit, .lit = v});
  }

  ExprNodePtr parse_name() {
    std::size_t start = pos_;
    while (pos_ < src_.size() &&
           (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_'))
      ++pos_;
    std::string name(src_.substr(start, pos_ - start));
    if (name == "pi") return make_node({.kind = ExprNode::Kind::Pi});
    auto it = kFuncs.find(name);
    if (it != kFuncs.end()) {
      if (!eat('(')) fail("'(' after function name '" + name + "'");
      ExprNodePtr arg = parse_sum();
      if (!eat(')')) fail("')'");
      return make_node({.kind = ExprNode::Kind::Apply, .func = it->second, .a = arg});
    }
    return make_node({.kind = ExprNode::Kind::Coord, .name = std::move(name)});
  }
};

// --------------------------------------------------------------- printer

// Precedence levels: sum 1, product 2, unary minus 3, power 4, atom 5.
int precedence(const ExprNode& n) {
  switch (n.kind) {
    case ExprNode::Kind::Bin:
      switch (n.op) {
        case BinOp::Add:
        case BinOp::Sub: return 1;
        case BinOp::Mul:
        case BinOp::Div: return 2;
        case BinOp::Pow: return 4;
      }
      return 1;
    case ExprNode::Kind::Neg: return 3;
    case ExprNode::Kind::Lit: return n.lit < 0 ? 3 : 5;
    default: return 5;
  }
}

void print_node(const ExprNode& n, std::ostream& os);

void print_child(const ExprNode& child, int min_prec, std::ostream& os) {
  if (precedence(child) < min_prec) {
    os << '(';
    print_node(child, os);
    os << ')';
  } else {
    print_node(child, os);
  }
}

void print_node(const ExprNode& n, std::ostream& os) {
  switch (n.kind) {
    case ExprNode::Kind::Coord:
      os << n.name;
      return;
    case ExprNode::Kind::Pi:
      os << "pi";
      return;
    case ExprNode::Kind::Lit: {
      std::ostringstream tmp;
      tmp.precision(17);
      tmp << n.lit;
      os << tmp.str();
      return;
    }
    case ExprNode::Kind::Neg:
      os << '-';
      print_child(*n.a, 3, os);
      return;
    case ExprNode::Kind::Apply:
      os << func_name(n.func) << '(';
      print_node(*n.a, os);
      os << ')';
      return;
    case ExprNode::Kind::Bin:
      switch (n.op) {
        case BinOp::Add:
          print_child(*n.a, 1, os);
          os << '+';
          print_child(*n.b, 2, os);
          return;
        case BinOp::Sub:
          print_child(*n.a, 1, os);
          os << '-';
          print_child(*n.b, 2, os);
          return;
        case BinOp::Mul:
          print_child(*n.a, 2, os);
          os << '*';
          print_child(*n.b, 3, os);
          return;
        case BinOp::Div:
          print_child(*n.a, 2, os);
          os << '/';
          print_child(*n.b, 3, os);
          return;
        case BinOp::Pow:
          print_child(*n.a, 5, os);
          os << '^';
          print_child(*n.b, 4, os);
          return;
      }
  }
}

// ------------------------------------------------------------- evaluator

struct ContextualDomainError : DomainError {
  using DomainError::DomainError;
};

[[noreturn]] void domain_fail(const std::string& what, const ExprNode& n) {
  std::ostringstream os;
  print_node(n, os);
  throw ContextualDomainError(what + " in subexpression '" + os.str() + "'");
}

double ev_func(Func f, double x, const ExprNode& n) {
  switch (f) {
    case Func::Exp: return std::exp(x);
    case Func::Ln:
      if (x <= 0.0) domain_fail("ln of non-positive argument", n);
      return std::log(x);
    case Func::Sin: return std::sin(x);
    case Func::Cos: return std::cos(x);
    case Func::Tan: return std::tan(x);
    case Func::Sinh: return std::sinh(x);
    case Func::Cosh: return std::cosh(x);
    case Func::Tanh: return std::tanh(x);
    case Func::Sqrt:
      if (x <= 0.0) domain_fail("sqrt of non-positive argument", n);
      return std::sqrt(x);
  }
  throw Error("unreachable");
}

Jet ev_func(Func f, const Jet& x, const ExprNode& n) {
  try {
    switch (f) {
      case Func::Exp: return jet_exp(x);
      case Func::Ln: return jet_ln(x);
      case Func::Sin: return jet_sin(x);
      case Func::Cos: return jet_cos(x);
      case Func::Tan: return jet_tan(x);
      case Func::Sinh: return jet_sinh(x);
      case Func::Cosh: return jet_cosh(x);
      case Func::Tanh: return jet_tanh(x);
      case Func::Sqrt: return jet_sqrt(x);
    }
  } catch (const ContextualDomainError&) {
    throw;
  } catch (const DomainError& e) {
    domain_fail(e.what(), n);
  }
  throw Error("unreachable");
}

double scalar_of(double x) { return x; }
double scalar_of(const Jet& x) { return x.value(); }

template <class T>
T ev_pow(const T& a, const T& b, const ExprNode& n) {
  double p = scalar_of(b);
  // Integer exponents are repeated multiplication and allow any base;
  // everything else lowers to exp(p*ln(a)) and demands a positive base.
  if (p == std::floor(p) && std::abs(p) <= 64.0) {
    long long ip = static_cast<long long>(p);
    if (ip < 0 && scalar_of(a) == 0.0) domain_fail("zero base with negative exponent", n);
    if constexpr (std::is_same_v<T, double>) {
      return std::pow(a, static_cast<double>(ip));
    } else {
      return jet_pow_int(a, ip);
    }
  }
  if (scalar_of(a) <= 0.0) domain_fail("non-integer power of a non-positive base", n);
  if constexpr (std::is_same_v<T, double>) {
    return std::pow(a, p);
  } else {
    return jet_exp(jet_ln(a) * b);
  }
}

template <class T>
T ev_node(const ExprNode& n, std::span<const T> coords) {
  switch (n.kind) {
    case ExprNode::Kind::Coord:
      if (n.coord < 0)
        throw BindError("expression evaluated before binding: coordinate '" + n.name + "'");
      return coords[static_cast<std::size_t>(n.coord)];
    case ExprNode::Kind::Lit:
      if constexpr (std::is_same_v<T, double>) return n.lit;
      else return Jet::constant(coords[0].space_ptr(), n.lit);
    case ExprNode::Kind::Pi:
      if constexpr (std::is_same_v<T, double>) return std::numbers::pi;
      else return Jet::constant(coords[0].space_ptr(), std::numbers::pi);
    case ExprNode::Kind::Neg:
      return -ev_node<T>(*n.a, coords);
    case ExprNode::Kind::Apply:
      return ev_func(n.func, ev_node<T>(*n.a, coords), n);
    case ExprNode::Kind::Bin: {
      T a = ev_node<T>(*n.a, coords);
      if (n.op == BinOp::Pow) return ev_pow<T>(a, ev_node<T>(*n.b, coords), n);
      T b = ev_node<T>(*n.b, coords);
      switch (n.op) {
        case BinOp::Add: return a + b;
        case BinOp::Sub: return a - b;
        case BinOp::Mul: return a * b;
        case BinOp::Div:
          if (scalar_of(b) == 0.0) domain_fail("division by zero", n);
          return a / b;
        default: break;
      }
    }
  }
  throw Error("unreachable");
}

ExprNodePtr bind_node(const ExprNodePtr& n, std::span<const std::string> names) {
  if (!n) return n;
  ExprNode copy = *n;
  copy.a = bind_node(n->a, names);
  copy.b = bind_node(n->b, names);
  if (n->kind == ExprNode::Kind::Coord) {
    copy.coord = -1;
    for (std::size_t i = 0; i < names.size(); ++i) {
      if (names[i] == n->name) {
        copy.coord = static_cast<int>(i);
        break;
      }
    }
    if (copy.coord < 0)
      throw BindError("coordinate '" + n->name + "' is not declared in the chart");
  }
  return make_node(std::move(copy));
}

bool bound_node(const ExprNode& n) {
  if (n.kind == ExprNode::Kind::Coord && n.coord < 0) return false;
  if (n.a && !bound_node(*n.a)) return false;
  if (n.b && !bound_node(*n.b)) return false;
  return true;
}

bool same_node(const ExprNode& x, const ExprNode& y) {
  if (x.kind != y.kind) return false;
  switch (x.kind) {
    case ExprNode::Kind::Coord: return x.name == y.name;
    case ExprNode::Kind::Lit: return x.lit == y.lit;
    case ExprNode::Kind::Pi: return true;
    case ExprNode::Kind::Neg: return same_node(*x.a, *y.a);
    case ExprNode::Kind::Apply: return x.func == y.func && same_node(*x.a, *y.a);
    case ExprNode::Kind::Bin:
      return x.op == y.op && same_node(*x.a, *y.a) && same_node(*x.b, *y.b);
  }
  return false;
}

}  // namespace

std::string func_name(Func f) {
  switch (f) {
    case Func::Exp: return "exp";
    case Func::Ln: return "ln";
    case Func::Sin: return "sin";
    case Func::Cos: return "cos";
    case Func::Tan: return "tan";
    case Func::Sinh: return "sinh";
    case Func::Cosh: return "cosh";
    case Func::Tanh: return "tanh";
    case Func::Sqrt: return "sqrt";
  }
  return "?";
}

Expr Expr::parse(std::string_view source) { return Expr(Parser(source).parse()); }

Expr Expr::literal(double v) {
  return Expr(make_node({.kind = ExprNode::Kind::Lit, .lit = v}));
}

Expr Expr::coord(std::string name) {
  return Expr(make_node({.kind = ExprNode::Kind::Coord, .name = std::move(name)}));
}

Expr Expr::pi() { return Expr(make_node({.kind = ExprNode::Kind::Pi})); }

Expr Expr::apply(Func f, Expr arg) {
  return Expr(make_node({.kind = ExprNode::Kind::Apply, .func = f, .a = arg.root_}));
}

Expr Expr::operator-() const {
  // Same literal folding as the parser, so built and parsed trees agree.
  if (root_ && root_->kind == ExprNode::Kind::Lit)
    return Expr(make_node({.kind = ExprNode::Kind::Lit, .lit = -root_->lit}));
  return Expr(make_node({.kind = ExprNode::Kind::Neg, .a = root_}));
}

Expr operator+(const Expr& a, const Expr& b) {
  return Expr(make_node({.kind = ExprNode::Kind::Bin, .op = BinOp::Add, .a = a.root_, .b = b.root_}));
}
Expr operator-(const Expr& a, const Expr& b) {
  return Expr(make_node({.kind = ExprNode::Kind::Bin, .op = BinOp::Sub, .a = a.root_, .b = b.root_}));
}
Expr operator*(const Expr& a, const Expr& b) {
  return Expr(make_node({.kind = ExprNode::Kind::Bin, .op = BinOp::Mul, .a = a.root_, .b = b.root_}));
}
Expr operator/(const Expr& a, const Expr& b) {
  return Expr(make_node({.kind = ExprNode::Kind::Bin, .op = BinOp::Div, .a = a.root_, .b = b.root_}));
}
Expr Expr::pow(const Expr& exponent) const {
  return Expr(make_node({.kind = ExprNode::Kind::Bin, .op = BinOp::Pow, .a = root_, .b = exponent.root_}));
}

std::string Expr::str() const {
  if (!root_) return "";
  std::ostringstream os;
  print_node(*root_, os);
  return os.str();
}

bool Expr::same_structure(const Expr& other) const {
  if (!root_ || !other.root_) return root_ == other.root_;
  return same_node(*root_, *other.root_);
}

Expr Expr::bind(std::span<const std::string> coord_names) const {
  if (!root_) throw Error("bind on an empty expression");
  return Expr(bind_node(root_, coord_names));
}

bool Expr::is_bound() const { return root_ && bound_node(*root_); }

double Expr::eval(std::span<const double> coords) const {
  if (!root_) throw Error("eval on an empty expression");
  return ev_node<double>(*root_, coords);
}

Jet Expr::eval(std::span<const Jet> coords) const {
  if (!root_) throw Error("eval on an empty expression");
  return ev_node<Jet>(*root_, coords);
}

}  // namespace qys

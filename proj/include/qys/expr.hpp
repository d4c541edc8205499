#pragma once

#include <memory>
#include <span>
#include <string>
#include <string_view>

#include "qys/errors.hpp"
#include "qys/jet.hpp"

namespace qys {

enum class BinOp { Add, Sub, Mul, Div, Pow };
enum class Func { Exp, Ln, Sin, Cos, Tan, Sinh, Cosh, Tanh, Sqrt };

struct ExprNode;
using ExprNodePtr = std::shared_ptr<const ExprNode>;

struct ExprNode {
  enum class Kind { Coord, Lit, Pi, Neg, Apply, Bin };
  Kind kind;
  std::string name;   // Coord
  int coord = -1;     // Coord, set by binding
  double lit = 0.0;   // Lit
  Func func{};        // Apply
  BinOp op{};         // Bin
  ExprNodePtr a, b;   // operands
};

/// Immutable closed-form scalar expression over named coordinates.
/// Parsed from text, printable back to an equivalent source string, and
/// evaluable on reals or on jets (which yields all mixed partials at once).
class Expr {
 public:
  Expr() = default;

  /// Recursive-descent parse. '^' binds tightest and is right-associative,
  /// unary minus sits between '^' and '*'/'/'. Throws SyntaxError with the
  /// byte offset and the expected-token set.
  static Expr parse(std::string_view source);

  static Expr literal(double v);
  static Expr coord(std::string name);
  static Expr pi();
  static Expr apply(Func f, Expr arg);

  Expr operator-() const;
  friend Expr operator+(const Expr& a, const Expr& b);
  friend Expr operator-(const Expr& a, const Expr& b);
  friend Expr operator*(const Expr& a, const Expr& b);
  friend Expr operator/(const Expr& a, const Expr& b);
  Expr pow(const Expr& exponent) const;

  bool valid() const { return root_ != nullptr; }
  const ExprNode& root() const { return *root_; }

  /// Source form; parse(str()) is structurally identical to this expression.
  std::string str() const;

  bool same_structure(const Expr& other) const;

  /// Resolve coordinate references against an ordered name list. Unresolved
  /// names raise BindError. Returns a new bound expression.
  Expr bind(std::span<const std::string> coord_names) const;
  bool is_bound() const;

  /// Plain real evaluation (expression must be bound).
  double eval(std::span<const double> coords) const;
  /// Jet evaluation; coordinate i must be seeded as Jet::variable(space, i).
  Jet eval(std::span<const Jet> coords) const;

 private:
  explicit Expr(ExprNodePtr root) : root_(std::move(root)) {}
  ExprNodePtr root_;
};

std::string func_name(Func f);

}  // namespace qys

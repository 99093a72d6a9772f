#ifndef HYDROCHECK_EXPR_HPP
#define HYDROCHECK_EXPR_HPP

#include <memory>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "hydrocheck/errors.hpp"

namespace hydrocheck {

enum class BinaryOp { Add, Sub, Mul, Div, Pow };
enum class UnaryFn { Sin, Cos, Exp, Ln, Sqrt };

struct ExprNode;
using ExprPtr = std::shared_ptr<const ExprNode>;
using NamesPtr = std::shared_ptr<const std::vector<std::string>>;

// One node of a parsed scalar expression over coordinates u^0..u^{N-1}.
// Trees are immutable after construction and freely shared.
struct ExprNode {
  enum class Kind { Constant, Coordinate, Negate, Binary, Call };
  Kind kind;
  double constant = 0.0; // Kind::Constant
  int coordinate = -1;   // Kind::Coordinate
  BinaryOp op{};         // Kind::Binary
  UnaryFn fn{};          // Kind::Call
  ExprPtr left;          // Binary lhs; Negate/Call child
  ExprPtr right;         // Binary rhs
};

ExprPtr make_constant(double value);
ExprPtr make_coordinate(int index);
ExprPtr make_negate(ExprPtr child);
ExprPtr make_binary(BinaryOp op, ExprPtr left, ExprPtr right);
ExprPtr make_call(UnaryFn fn, ExprPtr child);

bool ast_equal(const ExprPtr& a, const ExprPtr& b);

// "u1".."uN"
NamesPtr default_names(int dimension);

// Value, gradient and Hessian of a scalar field at a point. The Hessian is
// exactly symmetric: only the upper triangle is ever computed, the lower is a
// mirrored copy.
struct Jet2 {
  double value = 0.0;
  Eigen::VectorXd grad;
  Eigen::MatrixXd hess;

  explicit Jet2(int n = 0)
      : grad(Eigen::VectorXd::Zero(n)), hess(Eigen::MatrixXd::Zero(n, n)) {}
};

// A scalar coordinate expression bound to a fixed coordinate space.
class Expression {
public:
  Expression() = default;
  Expression(ExprPtr root, NamesPtr names);

  int dimension() const { return names_ ? static_cast<int>(names_->size()) : 0; }
  const ExprPtr& root() const { return root_; }
  const NamesPtr& names() const { return names_; }
  bool valid() const { return root_ != nullptr; }

  double value(const Eigen::VectorXd& point) const;
  Jet2 jet(const Eigen::VectorXd& point) const;

  // Canonical printer; parse(text()) reproduces the tree exactly.
  std::string text() const;

  // Substitutes u^i -> sum_j a(i,j) u^j, yielding an expression in the same
  // coordinate space (constant linear change of coordinates).
  Expression substitute_linear(const Eigen::MatrixXd& a) const;

  static Expression constant(double c, NamesPtr names);
  static Expression coordinate(int index, NamesPtr names);

private:
  ExprPtr root_;
  NamesPtr names_;
};

// Recursive-descent parser for the grammar
//   expr   := term (("+"|"-") term)*
//   term   := factor (("*"|"/") factor)*
//   factor := "-" factor | power
//   power  := atom ("^" factor)?
//   atom   := NUMBER | IDENT | IDENT "(" expr ")" | "(" expr ")"
// "^" is right-associative and binds tighter than unary minus, so
// "-u1^2" is -(u1^2) while "u1^-2" carries the minus into the exponent.
Expression parse_expression(const std::string& text,
                            const std::vector<std::string>& coordinate_names);
Expression parse_expression(const std::string& text, NamesPtr names);

std::string unparse(const ExprPtr& node, const std::vector<std::string>& names);

} // namespace hydrocheck

#endif

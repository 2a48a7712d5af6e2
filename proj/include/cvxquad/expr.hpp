#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cvxquad/funcs.hpp"

// Single-variable expressions for functions entered as text.
//
//   expr     := term (('+' | '-') term)*
//   term     := unary (('*' | '/') unary)*
//   unary    := '-' unary | power
//   power    := primary ('^' exponent)*        exponent must not use the variable
//   exponent := '-' exponent | primary
//   primary  := number | variable | 'pi' | name '(' expr [',' expr] ')' | '(' expr ')'
//
// Functions: exp, log (alias ln), sqrt, abs, max(u, v).
namespace cvxquad::expr {

enum class Op { constant, variable, neg, exp, log, sqrt, abs, add, sub, mul, div, pow, max };

struct Token {
  enum class Kind { number, identifier, op, paren, comma };
  Kind kind;
  std::string text;
  std::size_t position;  // 1-based
};

std::vector<Token> tokenize(std::string_view src);

/// Immutable expression tree with shared subtrees.
class Expression {
 public:
  static Expression constant(double v);
  static Expression variable();
  static Expression unary(Op op, Expression operand);
  static Expression binary(Op op, Expression lhs, Expression rhs);

  Op op() const noexcept;
  double value() const noexcept;  // constant nodes only
  const Expression& lhs() const;  // operand of unary nodes, left of binary
  const Expression& rhs() const;

  bool is_constant() const noexcept;  // no variable anywhere below
  bool contains(Op op) const noexcept;

  friend bool operator==(const Expression& x, const Expression& y);

 private:
  struct Node;
  explicit Expression(std::shared_ptr<const Node> node) : node_(std::move(node)) {}
  std::shared_ptr<const Node> node_;
};

Expression parse(std::string_view src, std::string_view variable = "x");

/// Value at t. Singularities (log or sqrt out of range, division by zero,
/// non-finite results) raise EvaluationError naming the subexpression.
double evaluate(const Expression& e, double t);

/// Text that parses back to the same tree.
std::string to_string(const Expression& e, std::string_view variable = "x");

/// Symbolic derivative with constant folding. Without a domain, abs and max are
/// rejected with NotDifferentiableError. With a domain they are accepted when
/// sampling shows the branch never switches there.
Expression derivative(const Expression& e);
Expression derivative(const Expression& e, const Interval& domain, int samples = 257);

/// Wraps an expression as a ConvexFunction: exact derivative oracle from the
/// symbolic derivative when one exists on the domain, finite differences
/// otherwise. Convexity is not checked here.
ConvexFunction to_function(const Expression& e, const Interval& domain, std::string label);

}  // namespace cvxquad::expr

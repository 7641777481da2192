#pragma once

// Arithmetic expressions in the variables x1..xn, the value language of the
// config format. Parsed once into a small tree; evaluation is reentrant.

#include <cstdint>
#include <string>
#include <vector>

#include "hodgeforms/forms.hpp"

namespace hodge {

/// A parsed expression. Grammar, loosest to tightest binding:
///   expr    := term (('+' | '-') term)*
///   term    := unary (('*' | '/') unary)*
///   unary   := '-' unary | power
///   power   := primary ('^' unary)?          (right associative)
///   primary := number | x1..xn | fn '(' expr ')' | '(' expr ')'
/// with fn one of sin, cos, exp, sqrt. Division by zero and sqrt of a
/// negative raise numerical errors carrying the byte span of the operation.
class Expression {
public:
  Expression() = default;

  bool valid() const { return !nodes_.empty(); }
  double eval(const Vector& x) const;
  /// Largest variable index appearing, 0 for constant expressions.
  int max_variable() const { return max_var_; }
  /// The original source text.
  const std::string& text() const { return text_; }

private:
  friend Expression parse_expression(const std::string& text);
  friend class ExpressionParser;

  enum class Op : std::uint8_t {
    number, variable, neg, add, sub, mul, div, pow, sin, cos, exp, sqrt
  };
  struct Node {
    Op op;
    double value = 0.0;  ///< number
    int var = 0;         ///< variable, 1-based
    int a = -1, b = -1;  ///< children
    std::uint32_t begin = 0, end = 0;  ///< byte span in text()
  };

  double eval_node(int node, const Vector& x) const;

  std::vector<Node> nodes_;
  int root_ = -1;
  int max_var_ = 0;
  std::string text_;
};

/// Recursive-descent parse. Syntax errors are config errors whose message
/// names the byte offset.
Expression parse_expression(const std::string& text);

}  // namespace hodge

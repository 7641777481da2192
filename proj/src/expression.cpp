#include "hodgeforms/expression.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>

#include "hodgeforms/errors.hpp"

namespace hodge {

namespace {

[[noreturn]] void syntax_error(size_t offset, const std::string& what) {
  throw Error(ErrorCode::config,
              "syntax error at offset " + std::to_string(offset) + ": " + what);
}

std::string span_text(std::uint32_t begin, std::uint32_t end) {
  return "offset " + std::to_string(begin) + ".." + std::to_string(end);
}

}  // namespace

class ExpressionParser {
public:
  explicit ExpressionParser(const std::string& text) : text_(text) {}

  Expression run() {
    Expression out;
    out.text_ = text_;
    nodes_ = &out.nodes_;
    out.root_ = parse_expr();
    skip_ws();
    if (pos_ < text_.size())
      syntax_error(pos_, "unexpected input");
    for (const auto& node : *nodes_)
      if (node.op == Expression::Op::variable && node.var > out.max_var_)
        out.max_var_ = node.var;
    return out;
  }

private:
  using Op = Expression::Op;

  void skip_ws() {
    while (pos_ < text_.size() && (text_[pos_] == ' ' || text_[pos_] == '\t'))
      ++pos_;
  }
  bool at(char c) {
    skip_ws();
    return pos_ < text_.size() && text_[pos_] == c;
  }
  bool eat(char c) {
    if (!at(c)) return false;
    ++pos_;
    return true;
  }

  int add_node(Expression::Node node) {
    nodes_->push_back(node);
    return static_cast<int>(nodes_->size()) - 1;
  }
  std::uint32_t node_begin(int i) const { return (*nodes_)[i].begin; }
  std::uint32_t node_end(int i) const { return (*nodes_)[i].end; }

  int parse_expr() {
    int lhs = parse_term();
    while (true) {
      if (eat('+'))
        lhs = binary(Op::add, lhs, parse_term());
      else if (eat('-'))
        lhs = binary(Op::sub, lhs, parse_term());
      else
        return lhs;
    }
  }

  int parse_term() {
    int lhs = parse_unary();
    while (true) {
      if (eat('*'))
        lhs = binary(Op::mul, lhs, parse_unary());
      else if (eat('/'))
        lhs = binary(Op::div, lhs, parse_unary());
      else
        return lhs;
    }
  }

  int parse_unary() {
    skip_ws();
    const auto start = static_cast<std::uint32_t>(pos_);
    if (eat('-')) {
      const int a = parse_unary();
      return add_node({Op::neg, 0.0, 0, a, -1, start, node_end(a)});
    }
    return parse_power();
  }

  int parse_power() {
    const int base = parse_primary();
    if (!eat('^')) return base;
    const int exponent = parse_unary();
    return add_node(
        {Op::pow, 0.0, 0, base, exponent, node_begin(base), node_end(exponent)});
  }

  int binary(Op op, int a, int b) {
    return add_node({op, 0.0, 0, a, b, node_begin(a), node_end(b)});
  }

  int parse_primary() {
    skip_ws();
    if (pos_ >= text_.size()) syntax_error(pos_, "expected an operand");
    const auto start = static_cast<std::uint32_t>(pos_);
    const char c = text_[pos_];

    if (c == '(') {
      ++pos_;
      const int inner = parse_expr();
      if (!eat(')')) syntax_error(pos_, "expected ')'");
      (*nodes_)[inner].begin = start;
      (*nodes_)[inner].end = static_cast<std::uint32_t>(pos_);
      return inner;
    }

    if ((c >= '0' && c <= '9') || c == '.') return parse_number();

    if (c >= 'a' && c <= 'z') {
      size_t len = 0;
      while (pos_ + len < text_.size() && text_[pos_ + len] >= 'a' &&
             text_[pos_ + len] <= 'z')
        ++len;
      const std::string word = text_.substr(pos_, len);
      if (word == "x") {
        pos_ += len;
        size_t digits = 0;
        while (pos_ + digits < text_.size() && text_[pos_ + digits] >= '0' &&
               text_[pos_ + digits] <= '9')
          ++digits;
        if (digits == 0) syntax_error(pos_, "expected a digit after 'x'");
        int var = 0;
        std::from_chars(text_.data() + pos_, text_.data() + pos_ + digits, var);
        if (var < 1) syntax_error(start, "variable indices start at x1");
        pos_ += digits;
        return add_node({Op::variable, 0.0, var, -1, -1, start,
                         static_cast<std::uint32_t>(pos_)});
      }
      Op fn;
      if (word == "sin")
        fn = Op::sin;
      else if (word == "cos")
        fn = Op::cos;
      else if (word == "exp")
        fn = Op::exp;
      else if (word == "sqrt")
        fn = Op::sqrt;
      else
        syntax_error(start, "unknown function '" + word + "'");
      pos_ += len;
      if (!eat('(')) syntax_error(pos_, "expected '(' after '" + word + "'");
      const int arg = parse_expr();
      if (!eat(')')) syntax_error(pos_, "expected ')'");
      return add_node({fn, 0.0, 0, arg, -1, start, static_cast<std::uint32_t>(pos_)});
    }

    syntax_error(pos_, std::string("unexpected character '") + c + "'");
  }

  int parse_number() {
    const auto start = static_cast<std::uint32_t>(pos_);
    double value = 0.0;
    const auto [end, ec] =
        std::from_chars(text_.data() + pos_, text_.data() + text_.size(), value);
    if (ec != std::errc())
      syntax_error(pos_, "malformed number");
    pos_ = static_cast<size_t>(end - text_.data());
    return add_node(
        {Op::number, value, 0, -1, -1, start, static_cast<std::uint32_t>(pos_)});
  }

  const std::string& text_;
  size_t pos_ = 0;
  std::vector<Expression::Node>* nodes_ = nullptr;
};

double Expression::eval(const Vector& x) const {
  if (!valid())
    throw Error(ErrorCode::invalid_argument, "eval of an empty expression");
  return eval_node(root_, x);
}

double Expression::eval_node(int node, const Vector& x) const {
  const Node& nd = nodes_[node];
  switch (nd.op) {
    case Op::number:
      return nd.value;
    case Op::variable:
      if (nd.var > x.size())
        throw Error(ErrorCode::invalid_argument,
                    "expression uses x" + std::to_string(nd.var) +
                        " but the point has dimension " + std::to_string(x.size()));
      return x[nd.var - 1];
    case Op::neg:
      return -eval_node(nd.a, x);
    case Op::add:
      return eval_node(nd.a, x) + eval_node(nd.b, x);
    case Op::sub:
      return eval_node(nd.a, x) - eval_node(nd.b, x);
    case Op::mul:
      return eval_node(nd.a, x) * eval_node(nd.b, x);
    case Op::div: {
      const double num = eval_node(nd.a, x);
      const double den = eval_node(nd.b, x);
      if (den == 0.0)
        throw Error(ErrorCode::numerical,
                    "division by zero at " + span_text(nd.begin, nd.end));
      return num / den;
    }
    case Op::pow:
      return std::pow(eval_node(nd.a, x), eval_node(nd.b, x));
    case Op::sin:
      return std::sin(eval_node(nd.a, x));
    case Op::cos:
      return std::cos(eval_node(nd.a, x));
    case Op::exp:
      return std::exp(eval_node(nd.a, x));
    case Op::sqrt: {
      const double arg = eval_node(nd.a, x);
      if (arg < 0.0)
        throw Error(ErrorCode::numerical,
                    "sqrt of a negative value at " + span_text(nd.begin, nd.end));
      return std::sqrt(arg);
    }
  }
  throw Error(ErrorCode::numerical, "corrupt expression node");
}

Expression parse_expression(const std::string& text) {
  return ExpressionParser(text).run();
}

}  // namespace hodge

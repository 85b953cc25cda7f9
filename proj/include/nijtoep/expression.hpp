#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "nijtoep/errors.hpp"
#include "nijtoep/series.hpp"

namespace nijtoep {

// Ring operations with domain guards. The double overloads mirror the series
// ring so eval<double> and eval<Series> reject the same inputs.
inline double ring_div(double a, double b) {
  if (std::abs(b) <= kUnitThreshold)
    throw Error(ErrorKind::NonUnitDivisor, "division: divisor is below the unit threshold");
  return a / b;
}
inline double ring_log(double a) {
  if (a <= kUnitThreshold) throw Error(ErrorKind::DomainViolation, "log: argument must be positive");
  return std::log(a);
}
inline double ring_sqrt(double a) {
  if (a <= kUnitThreshold) throw Error(ErrorKind::DomainViolation, "sqrt: argument must be positive");
  return std::sqrt(a);
}
template <typename S>
Series<S> ring_div(const Series<S>& a, const Series<S>& b) { return a / b; }
template <typename S>
Series<S> ring_log(const Series<S>& a) { return log(a); }
template <typename S>
Series<S> ring_sqrt(const Series<S>& a) { return sqrt(a); }

enum class AstOp : unsigned char {
  Constant,
  Variable,
  Add,
  Sub,
  Mul,
  Div,
  Neg,
  Pow,  // nonnegative integer literal exponent only
  Exp,
  Log,
  Sin,
  Cos,
  Sqrt,
};

// Parsed scalar function of named variables. Immutable after parse; eval is
// pure and works over any series-like ring (double, Series<double>, nested).
class Expression {
 public:
  static Expression parse(std::string_view text, std::vector<std::string> variables);

  const std::vector<std::string>& variables() const { return vars_; }
  int arity() const { return static_cast<int>(vars_.size()); }

  // Fully parenthesized form; reparses to a structurally equal AST.
  std::string pretty() const;
  bool same_structure(const Expression& other) const;

  template <typename S>
  S eval(std::span<const S> values) const;

  double operator()(std::span<const double> values) const { return eval<double>(values); }

  struct Node {
    AstOp op = AstOp::Constant;
    double value = 0.0;  // Constant
    int var = -1;        // Variable: index into variables()
    int lhs = -1;
    int rhs = -1;
    int exponent = 0;  // Pow
  };

 private:
  friend class ExprParser;

  std::string pretty_node(int idx) const;
  bool same_node(int idx, const Expression& other, int oidx) const;

  template <typename S>
  S eval_node(int idx, std::span<const S> values) const;

  std::vector<Node> nodes_;
  int root_ = -1;
  std::vector<std::string> vars_;
};

template <typename S>
S Expression::eval(std::span<const S> values) const {
  if (values.size() != vars_.size())
    throw Error(ErrorKind::ArityMismatch, "eval: binding does not cover the declared variables");
  if (values.empty())
    throw Error(ErrorKind::ArityMismatch, "eval: at least one bound variable is required");
  return eval_node<S>(root_, values);
}

template <typename S>
S Expression::eval_node(int idx, std::span<const S> values) const {
  using std::cos;
  using std::exp;
  using std::log;
  using std::sin;
  using std::sqrt;
  const Node& nd = nodes_[static_cast<std::size_t>(idx)];
  switch (nd.op) {
    case AstOp::Constant:
      return ScalarTraits<S>::constant_like(values[0], nd.value);
    case AstOp::Variable:
      return values[static_cast<std::size_t>(nd.var)];
    case AstOp::Add:
      return eval_node<S>(nd.lhs, values) + eval_node<S>(nd.rhs, values);
    case AstOp::Sub:
      return eval_node<S>(nd.lhs, values) - eval_node<S>(nd.rhs, values);
    case AstOp::Mul:
      return eval_node<S>(nd.lhs, values) * eval_node<S>(nd.rhs, values);
    case AstOp::Div:
      return ring_div(eval_node<S>(nd.lhs, values), eval_node<S>(nd.rhs, values));
    case AstOp::Neg:
      return -eval_node<S>(nd.lhs, values);
    case AstOp::Pow:
      return powi(eval_node<S>(nd.lhs, values), nd.exponent);
    case AstOp::Exp:
      return exp(eval_node<S>(nd.lhs, values));
    case AstOp::Log:
      return ring_log(eval_node<S>(nd.lhs, values));
    case AstOp::Sin:
      return sin(eval_node<S>(nd.lhs, values));
    case AstOp::Cos:
      return cos(eval_node<S>(nd.lhs, values));
    case AstOp::Sqrt:
      return ring_sqrt(eval_node<S>(nd.lhs, values));
  }
  throw Error(ErrorKind::DomainViolation, "eval: corrupt AST");
}

}  // namespace nijtoep

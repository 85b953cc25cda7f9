#include "nijtoep/expression.hpp"

#include <cctype>
#include <cstdio>
#include <cstdlib>
#include <numbers>

namespace nijtoep {

namespace {

std::string format_value(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

bool is_ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool is_ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

}  // namespace

// Recursive-descent parser. Precedence: ^ binds tighter than unary minus,
// which binds tighter than * and /, which bind tighter than + and -.
class ExprParser {
 public:
  ExprParser(std::string_view text, Expression& out) : text_(text), out_(out) {}

  void run() {
    skip_ws();
    if (pos_ >= text_.size()) throw SyntaxError(pos_, "empty expression");
    out_.root_ = parse_sum();
    skip_ws();
    if (pos_ < text_.size())
      throw SyntaxError(pos_, std::string("unexpected input starting at '") + text_[pos_] + "'");
  }

 private:
  int add_node(Expression::Node nd) {
    out_.nodes_.push_back(nd);
    return static_cast<int>(out_.nodes_.size()) - 1;
  }

  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip_ws();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  void expect(char c, const char* what) {
    if (!accept(c)) throw SyntaxError(pos_, std::string("expected ") + what);
  }

  int parse_sum() {
    int lhs = parse_term();
    for (;;) {
      skip_ws();
      if (accept('+')) {
        int rhs = parse_term();
        lhs = add_node({AstOp::Add, 0.0, -1, lhs, rhs, 0});
      } else if (accept('-')) {
        int rhs = parse_term();
        lhs = add_node({AstOp::Sub, 0.0, -1, lhs, rhs, 0});
      } else {
        return lhs;
      }
    }
  }

  int parse_term() {
    int lhs = parse_factor();
    for (;;) {
      skip_ws();
      if (accept('*')) {
        int rhs = parse_factor();
        lhs = add_node({AstOp::Mul, 0.0, -1, lhs, rhs, 0});
      } else if (accept('/')) {
        int rhs = parse_factor();
        lhs = add_node({AstOp::Div, 0.0, -1, lhs, rhs, 0});
      } else {
        return lhs;
      }
    }
  }

  int parse_factor() {
    skip_ws();
    if (accept('-')) {
      int child = parse_factor();
      // fold -const so pretty-printed negative literals round-trip
      const Expression::Node& nd = out_.nodes_[static_cast<std::size_t>(child)];
      if (nd.op == AstOp::Constant) {
        return add_node({AstOp::Constant, -nd.value, -1, -1, -1, 0});
      }
      return add_node({AstOp::Neg, 0.0, -1, child, -1, 0});
    }
    return parse_power();
  }

  int parse_power() {
    int base = parse_primary();
    skip_ws();
    if (accept('^')) {
      skip_ws();
      std::size_t start = pos_;
      while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
      if (pos_ == start)
        throw SyntaxError(start, "exponent must be a nonnegative integer literal");
      int exponent = std::atoi(std::string(text_.substr(start, pos_ - start)).c_str());
      return add_node({AstOp::Pow, 0.0, -1, base, -1, exponent});
    }
    return base;
  }

  int parse_primary() {
    skip_ws();
    if (pos_ >= text_.size()) throw SyntaxError(pos_, "unexpected end of expression");
    char c = text_[pos_];
    if (std::isdigit(static_cast<unsigned char>(c))) return parse_number();
    if (is_ident_start(c)) return parse_identifier();
    if (accept('(')) {
      int inner = parse_sum();
      expect(')', "')'");
      return inner;
    }
    throw SyntaxError(pos_, std::string("unexpected character '") + c + "'");
  }

  int parse_number() {
    std::size_t start = pos_;
    while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    if (pos_ < text_.size() && text_[pos_] == '.') {
      ++pos_;
      while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    }
    if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
      std::size_t mark = pos_;
      ++pos_;
      if (pos_ < text_.size() && (text_[pos_] == '+' || text_[pos_] == '-')) ++pos_;
      if (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
        while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
      } else {
        pos_ = mark;  // 'e' was an identifier boundary, not an exponent
      }
    }
    std::string tok(text_.substr(start, pos_ - start));
    char* end = nullptr;
    double v = std::strtod(tok.c_str(), &end);
    if (end != tok.c_str() + tok.size()) throw SyntaxError(start, "malformed number");
    return add_node({AstOp::Constant, v, -1, -1, -1, 0});
  }

  int parse_identifier() {
    std::size_t start = pos_;
    while (pos_ < text_.size() && is_ident_char(text_[pos_])) ++pos_;
    std::string name(text_.substr(start, pos_ - start));
    skip_ws();
    if (pos_ < text_.size() && text_[pos_] == '(') {
      ++pos_;
      AstOp op;
      if (name == "exp") op = AstOp::Exp;
      else if (name == "log") op = AstOp::Log;
      else if (name == "sin") op = AstOp::Sin;
      else if (name == "cos") op = AstOp::Cos;
      else if (name == "sqrt") op = AstOp::Sqrt;
      else throw Error(ErrorKind::UnknownFunction, "unknown function '" + name + "' at offset " + std::to_string(start));
      int arg = parse_sum();
      expect(')', "')' after function argument");
      return add_node({op, 0.0, -1, arg, -1, 0});
    }
    if (name == "pi")
      return add_node({AstOp::Constant, std::numbers::pi, -1, -1, -1, 0});
    for (std::size_t i = 0; i < out_.vars_.size(); ++i) {
      if (out_.vars_[i] == name)
        return add_node({AstOp::Variable, 0.0, static_cast<int>(i), -1, -1, 0});
    }
    throw Error(ErrorKind::UnknownVariable, "unknown variable '" + name + "' at offset " + std::to_string(start));
  }

  std::string_view text_;
  Expression& out_;
  std::size_t pos_ = 0;
};

Expression Expression::parse(std::string_view text, std::vector<std::string> variables) {
  Expression e;
  e.vars_ = std::move(variables);
  if (text.empty()) throw SyntaxError(0, "empty expression");
  ExprParser parser(text, e);
  parser.run();
  return e;
}

std::string Expression::pretty() const { return pretty_node(root_); }

std::string Expression::pretty_node(int idx) const {
  const Node& nd = nodes_[static_cast<std::size_t>(idx)];
  switch (nd.op) {
    case AstOp::Constant:
      return format_value(nd.value);
    case AstOp::Variable:
      return vars_[static_cast<std::size_t>(nd.var)];
    case AstOp::Add:
      return "(" + pretty_node(nd.lhs) + " + " + pretty_node(nd.rhs) + ")";
    case AstOp::Sub:
      return "(" + pretty_node(nd.lhs) + " - " + pretty_node(nd.rhs) + ")";
    case AstOp::Mul:
      return "(" + pretty_node(nd.lhs) + " * " + pretty_node(nd.rhs) + ")";
    case AstOp::Div:
      return "(" + pretty_node(nd.lhs) + " / " + pretty_node(nd.rhs) + ")";
    case AstOp::Neg:
      return "(-(" + pretty_node(nd.lhs) + "))";
    case AstOp::Pow:
      return "(" + pretty_node(nd.lhs) + ")^" + std::to_string(nd.exponent);
    case AstOp::Exp:
      return "exp(" + pretty_node(nd.lhs) + ")";
    case AstOp::Log:
      return "log(" + pretty_node(nd.lhs) + ")";
    case AstOp::Sin:
      return "sin(" + pretty_node(nd.lhs) + ")";
    case AstOp::Cos:
      return "cos(" + pretty_node(nd.lhs) + ")";
    case AstOp::Sqrt:
      return "sqrt(" + pretty_node(nd.lhs) + ")";
  }
  return {};
}

bool Expression::same_structure(const Expression& other) const {
  if (vars_ != other.vars_) return false;
  return same_node(root_, other, other.root_);
}

bool Expression::same_node(int idx, const Expression& other, int oidx) const {
  const Node& a = nodes_[static_cast<std::size_t>(idx)];
  const Node& b = other.nodes_[static_cast<std::size_t>(oidx)];
  if (a.op != b.op) return false;
  switch (a.op) {
    case AstOp::Constant:
      return a.value == b.value;
    case AstOp::Variable:
      return a.var == b.var;
    case AstOp::Add:
    case AstOp::Sub:
    case AstOp::Mul:
    case AstOp::Div:
      return same_node(a.lhs, other, b.lhs) && same_node(a.rhs, other, b.rhs);
    case AstOp::Pow:
      return a.exponent == b.exponent && same_node(a.lhs, other, b.lhs);
    default:
      return same_node(a.lhs, other, b.lhs);
  }
}

}  // namespace nijtoep

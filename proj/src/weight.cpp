#include "steklov/weight.hpp"

#include <cctype>
#include <cmath>
#include <functional>

namespace steklov {

namespace detail {

struct ExprNode {
  enum class Op { Const, Var, Add, Sub, Mul, Div, Pow, Neg, Sin, Cos, Exp, Sqrt, Abs };
  Op op = Op::Const;
  double value = 0.0;
  int var = 0;  // 0:x 1:y 2:z
  std::shared_ptr<const ExprNode> lhs, rhs;

  double eval(const Vec3& p) const {
    switch (op) {
      case Op::Const: return value;
      case Op::Var: return p[var];
      case Op::Add: return lhs->eval(p) + rhs->eval(p);
      case Op::Sub: return lhs->eval(p) - rhs->eval(p);
      case Op::Mul: return lhs->eval(p) * rhs->eval(p);
      case Op::Div: return lhs->eval(p) / rhs->eval(p);
      case Op::Pow: return std::pow(lhs->eval(p), rhs->eval(p));
      case Op::Neg: return -lhs->eval(p);
      case Op::Sin: return std::sin(lhs->eval(p));
      case Op::Cos: return std::cos(lhs->eval(p));
      case Op::Exp: return std::exp(lhs->eval(p));
      case Op::Sqrt: return std::sqrt(lhs->eval(p));
      case Op::Abs: return std::abs(lhs->eval(p));
    }
    return 0.0;
  }

  bool has_var() const {
    if (op == Op::Var) return true;
    if (lhs && lhs->has_var()) return true;
    if (rhs && rhs->has_var()) return true;
    return false;
  }
};

namespace {

using NodePtr = std::shared_ptr<const ExprNode>;

NodePtr make(ExprNode::Op op, NodePtr lhs = nullptr, NodePtr rhs = nullptr) {
  auto n = std::make_shared<ExprNode>();
  n->op = op;
  n->lhs = std::move(lhs);
  n->rhs = std::move(rhs);
  return n;
}

NodePtr make_const(double v) {
  auto n = std::make_shared<ExprNode>();
  n->op = ExprNode::Op::Const;
  n->value = v;
  return n;
}

struct Parser {
  const std::string& s;
  size_t i = 0;

  explicit Parser(const std::string& text) : s(text) {}

  void skip() {
    while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
  }
  bool eat(char c) {
    skip();
    if (i < s.size() && s[i] == c) {
      ++i;
      return true;
    }
    return false;
  }
  [[noreturn]] void fail(const std::string& what) {
    throw std::invalid_argument("weight expression: " + what + " at position " + std::to_string(i) +
                                " in '" + s + "'");
  }

  NodePtr parse() {
    NodePtr e = sum();
    skip();
    if (i != s.size()) fail("trailing input");
    return e;
  }

  NodePtr sum() {
    NodePtr e = product();
    for (;;) {
      if (eat('+')) e = make(ExprNode::Op::Add, e, product());
      else if (eat('-')) e = make(ExprNode::Op::Sub, e, product());
      else return e;
    }
  }

  NodePtr product() {
    NodePtr e = power();
    for (;;) {
      if (eat('*')) e = make(ExprNode::Op::Mul, e, power());
      else if (eat('/')) e = make(ExprNode::Op::Div, e, power());
      else return e;
    }
  }

  NodePtr power() {
    NodePtr base = unary();
    if (eat('^')) return make(ExprNode::Op::Pow, base, unary());
    return base;
  }

  NodePtr unary() {
    if (eat('-')) return make(ExprNode::Op::Neg, unary());
    if (eat('+')) return unary();
    return atom();
  }

  NodePtr atom() {
    skip();
    if (i >= s.size()) fail("unexpected end of input");
    char c = s[i];
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      size_t end;
      double v = std::stod(s.substr(i), &end);
      i += end;
      return make_const(v);
    }
    if (c == '(') {
      ++i;
      NodePtr e = sum();
      if (!eat(')')) fail("missing ')'");
      return e;
    }
    if (std::isalpha(static_cast<unsigned char>(c))) {
      size_t start = i;
      while (i < s.size() && std::isalpha(static_cast<unsigned char>(s[i]))) ++i;
      std::string name = s.substr(start, i - start);
      if (name == "x" || name == "y" || name == "z") {
        auto n = std::make_shared<ExprNode>();
        n->op = ExprNode::Op::Var;
        n->var = name == "x" ? 0 : (name == "y" ? 1 : 2);
        return n;
      }
      if (name == "pi") return make_const(M_PI);
      ExprNode::Op op;
      if (name == "sin") op = ExprNode::Op::Sin;
      else if (name == "cos") op = ExprNode::Op::Cos;
      else if (name == "exp") op = ExprNode::Op::Exp;
      else if (name == "sqrt") op = ExprNode::Op::Sqrt;
      else if (name == "abs") op = ExprNode::Op::Abs;
      else fail("unknown identifier '" + name + "'");
      if (!eat('(')) fail("'" + name + "' needs '('");
      NodePtr arg = sum();
      if (!eat(')')) fail("missing ')'");
      return make(op, arg);
    }
    fail(std::string("unexpected character '") + c + "'");
  }
};

}  // namespace

}  // namespace detail

Weight::Weight() : root_(detail::make_const(1.0)), text_("1"), constant_(true) {}

Weight Weight::constant(double value) {
  if (!(value > 0.0)) throw std::invalid_argument("weight: constant must be positive");
  Weight w;
  w.root_ = detail::make_const(value);
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  w.text_ = buf;
  w.constant_ = true;
  return w;
}

Weight Weight::parse(const std::string& expression) {
  detail::Parser parser(expression);
  Weight w;
  w.root_ = parser.parse();
  w.text_ = expression;
  w.constant_ = !w.root_->has_var();
  if (w.constant_ && !(w.root_->eval(Vec3::Zero()) > 0.0))
    throw std::invalid_argument("weight: expression '" + expression + "' is not positive");
  return w;
}

double Weight::operator()(const Vec3& p) const { return root_->eval(p); }

double Weight::positive_at(const Vec3& p) const {
  double v = root_->eval(p);
  if (!(v > 0.0))
    throw std::domain_error("weight: nonpositive sample " + std::to_string(v) + " of '" + text_ + "'");
  return v;
}

}  // namespace steklov

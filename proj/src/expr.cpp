#include "hydrocheck/expr.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>

namespace hydrocheck {

ExprPtr make_constant(double value) {
  auto n = std::make_shared<ExprNode>();
  n->kind = ExprNode::Kind::Constant;
  n->constant = value;
  return n;
}

ExprPtr make_coordinate(int index) {
  auto n = std::make_shared<ExprNode>();
  n->kind = ExprNode::Kind::Coordinate;
  n->coordinate = index;
  return n;
}

ExprPtr make_negate(ExprPtr child) {
  auto n = std::make_shared<ExprNode>();
  n->kind = ExprNode::Kind::Negate;
  n->left = std::move(child);
  return n;
}

ExprPtr make_binary(BinaryOp op, ExprPtr left, ExprPtr right) {
  auto n = std::make_shared<ExprNode>();
  n->kind = ExprNode::Kind::Binary;
  n->op = op;
  n->left = std::move(left);
  n->right = std::move(right);
  return n;
}

ExprPtr make_call(UnaryFn fn, ExprPtr child) {
  auto n = std::make_shared<ExprNode>();
  n->kind = ExprNode::Kind::Call;
  n->fn = fn;
  n->left = std::move(child);
  return n;
}

bool ast_equal(const ExprPtr& a, const ExprPtr& b) {
  if (a == b) return true;
  if (!a || !b || a->kind != b->kind) return false;
  switch (a->kind) {
  case ExprNode::Kind::Constant:
    // bit-level comparison keeps the fixed-point property exact
    return a->constant == b->constant;
  case ExprNode::Kind::Coordinate:
    return a->coordinate == b->coordinate;
  case ExprNode::Kind::Negate:
    return ast_equal(a->left, b->left);
  case ExprNode::Kind::Binary:
    return a->op == b->op && ast_equal(a->left, b->left) && ast_equal(a->right, b->right);
  case ExprNode::Kind::Call:
    return a->fn == b->fn && ast_equal(a->left, b->left);
  }
  return false;
}

NamesPtr default_names(int dimension) {
  auto v = std::make_shared<std::vector<std::string>>();
  v->reserve(dimension);
  for (int i = 0; i < dimension; ++i) v->push_back("u" + std::to_string(i + 1));
  return v;
}

// ---------------------------------------------------------------------------
// Parser
// ---------------------------------------------------------------------------

namespace {

struct Parser {
  const std::string& src;
  const std::vector<std::string>& names;
  std::size_t pos = 0;

  void skip_ws() {
    while (pos < src.size() && std::isspace(static_cast<unsigned char>(src[pos]))) ++pos;
  }

  bool eat(char c) {
    skip_ws();
    if (pos < src.size() && src[pos] == c) {
      ++pos;
      return true;
    }
    return false;
  }

  [[noreturn]] void fail(const std::string& expected) { throw SyntaxError(pos, expected); }

  ExprPtr parse_expr() {
    ExprPtr lhs = parse_term();
    for (;;) {
      if (eat('+')) {
        lhs = make_binary(BinaryOp::Add, lhs, parse_term());
      } else if (eat('-')) {
        lhs = make_binary(BinaryOp::Sub, lhs, parse_term());
      } else {
        return lhs;
      }
    }
  }

  ExprPtr parse_term() {
    ExprPtr lhs = parse_factor();
    for (;;) {
      if (eat('*')) {
        lhs = make_binary(BinaryOp::Mul, lhs, parse_factor());
      } else if (eat('/')) {
        lhs = make_binary(BinaryOp::Div, lhs, parse_factor());
      } else {
        return lhs;
      }
    }
  }

  ExprPtr parse_factor() {
    if (eat('-')) return make_negate(parse_factor());
    return parse_power();
  }

  ExprPtr parse_power() {
    ExprPtr base = parse_atom();
    if (eat('^')) return make_binary(BinaryOp::Pow, base, parse_factor());
    return base;
  }

  ExprPtr parse_atom() {
    skip_ws();
    if (pos >= src.size()) fail("a number, identifier or '('");
    char c = src[pos];
    if (c == '(') {
      ++pos;
      ExprPtr inner = parse_expr();
      if (!eat(')')) fail("')'");
      return inner;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return parse_ident();
    fail("a number, identifier or '('");
  }

  ExprPtr parse_number() {
    std::size_t start = pos;
    bool digits = false;
    while (pos < src.size() && std::isdigit(static_cast<unsigned char>(src[pos]))) {
      ++pos;
      digits = true;
    }
    if (pos < src.size() && src[pos] == '.') {
      ++pos;
      while (pos < src.size() && std::isdigit(static_cast<unsigned char>(src[pos]))) {
        ++pos;
        digits = true;
      }
    }
    if (!digits) fail("digits in number literal");
    if (pos < src.size() && (src[pos] == 'e' || src[pos] == 'E')) {
      std::size_t mark = pos;
      ++pos;
      if (pos < src.size() && (src[pos] == '+' || src[pos] == '-')) ++pos;
      if (pos < src.size() && std::isdigit(static_cast<unsigned char>(src[pos]))) {
        while (pos < src.size() && std::isdigit(static_cast<unsigned char>(src[pos]))) ++pos;
      } else {
        pos = mark; // the 'e' starts a following identifier, not an exponent
      }
    }
    return make_constant(std::strtod(src.substr(start, pos - start).c_str(), nullptr));
  }

  ExprPtr parse_ident() {
    std::size_t start = pos;
    while (pos < src.size() &&
           (std::isalnum(static_cast<unsigned char>(src[pos])) || src[pos] == '_'))
      ++pos;
    std::string id = src.substr(start, pos - start);
    skip_ws();
    if (pos < src.size() && src[pos] == '(') {
      ++pos;
      UnaryFn fn;
      if (id == "sin") fn = UnaryFn::Sin;
      else if (id == "cos") fn = UnaryFn::Cos;
      else if (id == "exp") fn = UnaryFn::Exp;
      else if (id == "ln") fn = UnaryFn::Ln;
      else if (id == "sqrt") fn = UnaryFn::Sqrt;
      else throw UnknownSymbol(start, id);
      ExprPtr arg = parse_expr();
      if (!eat(')')) fail("')'");
      return make_call(fn, arg);
    }
    for (std::size_t i = 0; i < names.size(); ++i)
      if (names[i] == id) return make_coordinate(static_cast<int>(i));
    throw UnknownSymbol(start, id);
  }
};

} // namespace

Expression parse_expression(const std::string& text, NamesPtr names) {
  Parser p{text, *names, 0};
  p.skip_ws();
  if (p.pos >= text.size()) throw SyntaxError(0, "a nonempty expression");
  ExprPtr root = p.parse_expr();
  p.skip_ws();
  if (p.pos != text.size()) p.fail("end of input");
  return Expression(root, std::move(names));
}

Expression parse_expression(const std::string& text,
                            const std::vector<std::string>& coordinate_names) {
  return parse_expression(text, std::make_shared<std::vector<std::string>>(coordinate_names));
}

// ---------------------------------------------------------------------------
// Canonical printer
// ---------------------------------------------------------------------------

namespace {

// Precedence levels mirror the parser: 1 +/-, 2 * and /, 3 unary minus, 4 ^,
// 5 atoms. print adds parentheses whenever a node's precedence falls below
// the context minimum, so reparsing reproduces the exact tree.

int node_prec(const ExprNode& n) {
  switch (n.kind) {
  case ExprNode::Kind::Binary:
    switch (n.op) {
    case BinaryOp::Add:
    case BinaryOp::Sub: return 1;
    case BinaryOp::Mul:
    case BinaryOp::Div: return 2;
    case BinaryOp::Pow: return 4;
    }
    return 1;
  case ExprNode::Kind::Negate: return 3;
  default: return 5;
  }
}

std::string format_constant(double v) {
  // shortest decimal form that still round-trips through strtod
  for (int prec = 1; prec < 17; ++prec) {
    char probe[40];
    std::snprintf(probe, sizeof(probe), "%.*g", prec, v);
    if (std::strtod(probe, nullptr) == v) return probe;
  }
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void print_node(const ExprNode& n, const std::vector<std::string>& names, int min_prec,
                std::string& out) {
  int prec = node_prec(n);
  bool parens = prec < min_prec;
  if (parens) out += '(';
  switch (n.kind) {
  case ExprNode::Kind::Constant:
    out += format_constant(n.constant);
    break;
  case ExprNode::Kind::Coordinate:
    out += names.at(n.coordinate);
    break;
  case ExprNode::Kind::Negate:
    out += '-';
    print_node(*n.left, names, 3, out);
    break;
  case ExprNode::Kind::Binary: {
    const char* sym = "";
    int lp = prec, rp = prec + 1;
    switch (n.op) {
    case BinaryOp::Add: sym = " + "; break;
    case BinaryOp::Sub: sym = " - "; break;
    case BinaryOp::Mul: sym = "*"; break;
    case BinaryOp::Div: sym = "/"; break;
    case BinaryOp::Pow:
      sym = "^";
      lp = 5; // (a^b)^c and (-a)^b keep parentheses on the left
      rp = 3; // the exponent re-enters at factor level: a^-b, a^b^c stay bare
      break;
    }
    print_node(*n.left, names, lp, out);
    out += sym;
    print_node(*n.right, names, rp, out);
    break;
  }
  case ExprNode::Kind::Call:
    switch (n.fn) {
    case UnaryFn::Sin: out += "sin("; break;
    case UnaryFn::Cos: out += "cos("; break;
    case UnaryFn::Exp: out += "exp("; break;
    case UnaryFn::Ln: out += "ln("; break;
    case UnaryFn::Sqrt: out += "sqrt("; break;
    }
    print_node(*n.left, names, 0, out);
    out += ')';
    break;
  }
  if (parens) out += ')';
}

} // namespace

std::string unparse(const ExprPtr& node, const std::vector<std::string>& names) {
  std::string out;
  if (node) print_node(*node, names, 0, out);
  return out;
}

// ---------------------------------------------------------------------------
// Evaluation
// ---------------------------------------------------------------------------

namespace {

[[noreturn]] void domain_error(const std::string& what, const ExprNode& node,
                               const std::vector<std::string>& names) {
  throw DomainError(what, unparse(std::make_shared<ExprNode>(node), names));
}

double eval_value(const ExprNode& n, const Eigen::VectorXd& p,
                  const std::vector<std::string>& names) {
  switch (n.kind) {
  case ExprNode::Kind::Constant: return n.constant;
  case ExprNode::Kind::Coordinate: return p[n.coordinate];
  case ExprNode::Kind::Negate: return -eval_value(*n.left, p, names);
  case ExprNode::Kind::Binary: {
    double a = eval_value(*n.left, p, names);
    double b = eval_value(*n.right, p, names);
    switch (n.op) {
    case BinaryOp::Add: return a + b;
    case BinaryOp::Sub: return a - b;
    case BinaryOp::Mul: return a * b;
    case BinaryOp::Div:
      if (b == 0.0) domain_error("division by zero", n, names);
      return a / b;
    case BinaryOp::Pow:
      if (a > 0.0) return std::pow(a, b);
      if (b == std::floor(b)) {
        if (a == 0.0 && b < 0.0) domain_error("zero raised to a negative power", n, names);
        return std::pow(a, b);
      }
      domain_error("fractional power of a non-positive base", n, names);
    }
    return 0.0;
  }
  case ExprNode::Kind::Call: {
    double x = eval_value(*n.left, p, names);
    switch (n.fn) {
    case UnaryFn::Sin: return std::sin(x);
    case UnaryFn::Cos: return std::cos(x);
    case UnaryFn::Exp: return std::exp(x);
    case UnaryFn::Ln:
      if (x <= 0.0) domain_error("ln of a non-positive value", n, names);
      return std::log(x);
    case UnaryFn::Sqrt:
      if (x <= 0.0) domain_error("sqrt of a non-positive value", n, names);
      return std::sqrt(x);
    }
    return 0.0;
  }
  }
  return 0.0;
}

// True when the subtree contains no coordinate; such exponents are folded to
// a value so integer powers of negative bases stay in the real domain.
bool is_constant_tree(const ExprNode& n) {
  switch (n.kind) {
  case ExprNode::Kind::Constant: return true;
  case ExprNode::Kind::Coordinate: return false;
  case ExprNode::Kind::Negate: return is_constant_tree(*n.left);
  case ExprNode::Kind::Binary: return is_constant_tree(*n.left) && is_constant_tree(*n.right);
  case ExprNode::Kind::Call: return is_constant_tree(*n.left);
  }
  return false;
}

struct JetEval {
  const Eigen::VectorXd& p;
  const std::vector<std::string>& names;
  int n;

  // chain rule to second order for out = f(a), given f, f', f'' at a.value
  Jet2 compose(const Jet2& a, double f, double df, double ddf) const {
    Jet2 out(n);
    out.value = f;
    out.grad = df * a.grad;
    for (int j = 0; j < n; ++j)
      for (int k = j; k < n; ++k) {
        double h = ddf * a.grad[j] * a.grad[k] + df * a.hess(j, k);
        out.hess(j, k) = h;
        out.hess(k, j) = h;
      }
    return out;
  }

  Jet2 eval(const ExprNode& node) const {
    switch (node.kind) {
    case ExprNode::Kind::Constant: {
      Jet2 out(n);
      out.value = node.constant;
      return out;
    }
    case ExprNode::Kind::Coordinate: {
      Jet2 out(n);
      out.value = p[node.coordinate];
      out.grad[node.coordinate] = 1.0;
      return out;
    }
    case ExprNode::Kind::Negate: {
      Jet2 a = eval(*node.left);
      a.value = -a.value;
      a.grad = -a.grad.eval();
      a.hess = -a.hess.eval();
      return a;
    }
    case ExprNode::Kind::Binary:
      return eval_binary(node);
    case ExprNode::Kind::Call: {
      Jet2 a = eval(*node.left);
      double x = a.value;
      switch (node.fn) {
      case UnaryFn::Sin: return compose(a, std::sin(x), std::cos(x), -std::sin(x));
      case UnaryFn::Cos: return compose(a, std::cos(x), -std::sin(x), -std::cos(x));
      case UnaryFn::Exp: {
        double e = std::exp(x);
        return compose(a, e, e, e);
      }
      case UnaryFn::Ln:
        if (x <= 0.0) domain_error("ln of a non-positive value", node, names);
        return compose(a, std::log(x), 1.0 / x, -1.0 / (x * x));
      case UnaryFn::Sqrt: {
        if (x <= 0.0) domain_error("sqrt of a non-positive value", node, names);
        double s = std::sqrt(x);
        return compose(a, s, 0.5 / s, -0.25 / (s * x));
      }
      }
      return Jet2(n);
    }
    }
    return Jet2(n);
  }

  Jet2 eval_binary(const ExprNode& node) const {
    switch (node.op) {
    case BinaryOp::Add: {
      Jet2 a = eval(*node.left), b = eval(*node.right);
      a.value += b.value;
      a.grad += b.grad;
      a.hess += b.hess;
      return a;
    }
    case BinaryOp::Sub: {
      Jet2 a = eval(*node.left), b = eval(*node.right);
      a.value -= b.value;
      a.grad -= b.grad;
      a.hess -= b.hess;
      return a;
    }
    case BinaryOp::Mul: {
      Jet2 a = eval(*node.left), b = eval(*node.right);
      Jet2 out(n);
      out.value = a.value * b.value;
      out.grad = a.grad * b.value + b.grad * a.value;
      for (int j = 0; j < n; ++j)
        for (int k = j; k < n; ++k) {
          double h = a.hess(j, k) * b.value + b.hess(j, k) * a.value +
                     a.grad[j] * b.grad[k] + a.grad[k] * b.grad[j];
          out.hess(j, k) = h;
          out.hess(k, j) = h;
        }
      return out;
    }
    case BinaryOp::Div: {
      Jet2 a = eval(*node.left), b = eval(*node.right);
      if (b.value == 0.0) domain_error("division by zero", node, names);
      Jet2 out(n);
      out.value = a.value / b.value;
      out.grad = (a.grad - out.value * b.grad) / b.value;
      for (int j = 0; j < n; ++j)
        for (int k = j; k < n; ++k) {
          double h = (a.hess(j, k) - out.value * b.hess(j, k) - out.grad[j] * b.grad[k] -
                      out.grad[k] * b.grad[j]) /
                     b.value;
          out.hess(j, k) = h;
          out.hess(k, j) = h;
        }
      return out;
    }
    case BinaryOp::Pow: {
      Jet2 a = eval(*node.left);
      if (is_constant_tree(*node.right)) {
        double c = eval_value(*node.right, p, names);
        double x = a.value;
        if (x > 0.0) {
          double f = std::pow(x, c);
          return compose(a, f, c * f / x, c * (c - 1.0) * f / (x * x));
        }
        if (c == std::floor(c)) {
          // integer exponent keeps x^c real for x <= 0
          if (x == 0.0) {
            if (c < 0.0) domain_error("zero raised to a negative power", node, names);
            if (c == 0.0) return compose(a, 1.0, 0.0, 0.0);
            if (c == 1.0) return compose(a, 0.0, 1.0, 0.0);
            if (c == 2.0) return compose(a, 0.0, 0.0, 2.0);
            return compose(a, 0.0, 0.0, 0.0);
          }
          double f = std::pow(x, c);
          return compose(a, f, c * f / x, c * (c - 1.0) * f / (x * x));
        }
        domain_error("fractional power of a non-positive base", node, names);
      }
      // variable exponent: a^b = exp(b ln a) requires a > 0
      Jet2 b = eval(*node.right);
      if (a.value <= 0.0) domain_error("power of a non-positive base", node, names);
      double la = std::log(a.value);
      double f = std::exp(b.value * la);
      Jet2 out(n);
      out.value = f;
      Eigen::VectorXd inner = b.grad * la + (b.value / a.value) * a.grad;
      out.grad = f * inner;
      for (int j = 0; j < n; ++j)
        for (int k = j; k < n; ++k) {
          double inner_jk =
              b.hess(j, k) * la + (b.grad[j] * a.grad[k] + b.grad[k] * a.grad[j]) / a.value +
              b.value * (a.hess(j, k) / a.value - a.grad[j] * a.grad[k] / (a.value * a.value));
          double h = f * (inner[j] * inner[k] + inner_jk);
          out.hess(j, k) = h;
          out.hess(k, j) = h;
        }
      return out;
    }
    }
    return Jet2(n);
  }
};

ExprPtr substitute_node(const ExprNode& node, const Eigen::MatrixXd& a) {
  switch (node.kind) {
  case ExprNode::Kind::Constant:
    return make_constant(node.constant);
  case ExprNode::Kind::Coordinate: {
    ExprPtr sum;
    for (int j = 0; j < a.cols(); ++j) {
      double c = a(node.coordinate, j);
      if (c == 0.0) continue;
      ExprPtr term;
      if (c == 1.0) term = make_coordinate(j);
      else if (c == -1.0) term = make_negate(make_coordinate(j));
      else if (c < 0.0)
        term = make_negate(make_binary(BinaryOp::Mul, make_constant(-c), make_coordinate(j)));
      else term = make_binary(BinaryOp::Mul, make_constant(c), make_coordinate(j));
      sum = sum ? make_binary(BinaryOp::Add, sum, term) : term;
    }
    return sum ? sum : make_constant(0.0);
  }
  case ExprNode::Kind::Negate:
    return make_negate(substitute_node(*node.left, a));
  case ExprNode::Kind::Binary:
    return make_binary(node.op, substitute_node(*node.left, a), substitute_node(*node.right, a));
  case ExprNode::Kind::Call:
    return make_call(node.fn, substitute_node(*node.left, a));
  }
  return nullptr;
}

} // namespace

Expression::Expression(ExprPtr root, NamesPtr names)
    : root_(std::move(root)), names_(std::move(names)) {}

double Expression::value(const Eigen::VectorXd& point) const {
  return eval_value(*root_, point, *names_);
}

Jet2 Expression::jet(const Eigen::VectorXd& point) const {
  JetEval ev{point, *names_, dimension()};
  return ev.eval(*root_);
}

std::string Expression::text() const { return unparse(root_, *names_); }

Expression Expression::substitute_linear(const Eigen::MatrixXd& a) const {
  return Expression(substitute_node(*root_, a), names_);
}

Expression Expression::constant(double c, NamesPtr names) {
  if (c < 0.0) return Expression(make_negate(make_constant(-c)), std::move(names));
  return Expression(make_constant(c), std::move(names));
}

Expression Expression::coordinate(int index, NamesPtr names) {
  return Expression(make_coordinate(index), std::move(names));
}

} // namespace hydrocheck

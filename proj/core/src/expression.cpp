#include "epsbeta/expression.hpp"

#include <cctype>
#include <cmath>
#include <numbers>
#include <vector>

namespace epsbeta {

namespace {

struct Value {
  bool vec = false;
  double s = 0.0;
  Point v{0.0, 0.0, 0.0};
};

enum class Op {
  Number, ScalarX, ScalarN, VecX, VecN,
  Add, Sub, Mul, Div, Pow, Neg,
  Abs, Min, Max, Sqrt, Exp, Log, Sin, Cos, Norm, Dot, Vec,
};

}  // namespace

struct Expression::Node {
  Op op = Op::Number;
  double value = 0.0;
  int index = 0;
  std::vector<std::shared_ptr<const Node>> args;
};

namespace {

using NodePtr = std::shared_ptr<const Expression::Node>;

NodePtr make(Op op, std::vector<NodePtr> args = {}, double value = 0.0, int index = 0) {
  auto n = std::make_shared<Expression::Node>();
  n->op = op;
  n->args = std::move(args);
  n->value = value;
  n->index = index;
  return n;
}

class Parser {
 public:
  explicit Parser(const std::string& s) : s_(s) {}

  NodePtr parse() {
    NodePtr e = expr();
    skip();
    if (pos_ != s_.size()) error("unexpected trailing input");
    return e;
  }
  bool uses_n = false;

 private:
  [[noreturn]] void error(const std::string& what) const {
    fail(ErrorCode::ExpressionSyntax, what + " at offset " + std::to_string(pos_) + " in '" + s_ + "'");
  }
  void skip() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }
  bool accept(char c) {
    skip();
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }
  void expect(char c) {
    if (!accept(c)) error(std::string("expected '") + c + "'");
  }

  NodePtr expr() {
    NodePtr lhs = term();
    for (;;) {
      if (accept('+')) lhs = make(Op::Add, {lhs, term()});
      else if (accept('-')) lhs = make(Op::Sub, {lhs, term()});
      else return lhs;
    }
  }
  NodePtr term() {
    NodePtr lhs = unary();
    for (;;) {
      if (accept('*')) lhs = make(Op::Mul, {lhs, unary()});
      else if (accept('/')) lhs = make(Op::Div, {lhs, unary()});
      else return lhs;
    }
  }
  NodePtr unary() {
    if (accept('-')) return make(Op::Neg, {unary()});
    if (accept('+')) return unary();
    NodePtr base = primary();
    if (accept('^')) return make(Op::Pow, {base, unary()});
    return base;
  }
  NodePtr primary() {
    skip();
    if (pos_ >= s_.size()) error("unexpected end of expression");
    const char c = s_[pos_];
    if (c == '(') {
      ++pos_;
      NodePtr e = expr();
      expect(')');
      return e;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      std::size_t used = 0;
      double v = 0.0;
      try {
        v = std::stod(s_.substr(pos_), &used);
      } catch (const std::exception&) {
        error("malformed number");
      }
      pos_ += used;
      return make(Op::Number, {}, v);
    }
    if (std::isalpha(static_cast<unsigned char>(c))) {
      std::size_t start = pos_;
      while (pos_ < s_.size() && std::isalnum(static_cast<unsigned char>(s_[pos_]))) ++pos_;
      const std::string id = s_.substr(start, pos_ - start);
      skip();
      if (pos_ < s_.size() && s_[pos_] == '(') return call(id);
      return identifier(id);
    }
    error("unexpected character");
  }
  NodePtr identifier(const std::string& id) {
    if (id == "pi") return make(Op::Number, {}, std::numbers::pi);
    if (id == "e") return make(Op::Number, {}, std::numbers::e);
    if (id == "x") return make(Op::VecX);
    if (id == "n") {
      uses_n = true;
      return make(Op::VecN);
    }
    if (id.size() == 2 && (id[0] == 'x' || id[0] == 'n') && id[1] >= '1' && id[1] <= '3') {
      if (id[0] == 'n') uses_n = true;
      return make(id[0] == 'x' ? Op::ScalarX : Op::ScalarN, {}, 0.0, id[1] - '1');
    }
    error("unknown identifier '" + id + "'");
  }
  NodePtr call(const std::string& name) {
    expect('(');
    std::vector<NodePtr> args;
    if (!accept(')')) {
      do args.push_back(expr());
      while (accept(','));
      expect(')');
    }
    struct Sig { const char* name; Op op; int lo; int hi; };
    static constexpr Sig table[] = {
        {"pow", Op::Pow, 2, 2},   {"abs", Op::Abs, 1, 1},   {"min", Op::Min, 2, 16},
        {"max", Op::Max, 2, 16},  {"sqrt", Op::Sqrt, 1, 1}, {"exp", Op::Exp, 1, 1},
        {"log", Op::Log, 1, 1},   {"sin", Op::Sin, 1, 1},   {"cos", Op::Cos, 1, 1},
        {"norm", Op::Norm, 1, 1}, {"dot", Op::Dot, 2, 2},   {"vec", Op::Vec, 1, 3},
    };
    for (const Sig& s : table) {
      if (name != s.name) continue;
      const int n = static_cast<int>(args.size());
      if (n < s.lo || n > s.hi) error("wrong number of arguments to " + name);
      return make(s.op, std::move(args));
    }
    error("unknown function '" + name + "'");
  }

  const std::string& s_;
  std::size_t pos_ = 0;
};

Value scalar(double s) { return Value{false, s, {}}; }

double need_scalar(const Value& v) {
  if (v.vec) fail(ErrorCode::ExpressionSyntax, "vector used where a scalar is required");
  return v.s;
}
const Point& need_vector(const Value& v) {
  if (!v.vec) fail(ErrorCode::ExpressionSyntax, "scalar used where a vector is required");
  return v.v;
}

Value eval(const Expression::Node& n, const Point& x, const Point& d) {
  auto arg = [&](std::size_t k) { return eval(*n.args[k], x, d); };
  switch (n.op) {
    case Op::Number: return scalar(n.value);
    case Op::ScalarX: return scalar(x[n.index]);
    case Op::ScalarN: return scalar(d[n.index]);
    case Op::VecX: return Value{true, 0.0, x};
    case Op::VecN: return Value{true, 0.0, d};
    case Op::Add:
    case Op::Sub: {
      const Value a = arg(0), b = arg(1);
      const double sg = n.op == Op::Add ? 1.0 : -1.0;
      if (a.vec != b.vec) fail(ErrorCode::ExpressionSyntax, "cannot mix scalar and vector in +/-");
      if (!a.vec) return scalar(a.s + sg * b.s);
      return Value{true, 0.0, {a.v[0] + sg * b.v[0], a.v[1] + sg * b.v[1], a.v[2] + sg * b.v[2]}};
    }
    case Op::Mul: {
      const Value a = arg(0), b = arg(1);
      if (a.vec && b.vec) fail(ErrorCode::ExpressionSyntax, "use dot() for vector products");
      if (!a.vec && !b.vec) return scalar(a.s * b.s);
      const Value& v = a.vec ? a : b;
      const double k = a.vec ? b.s : a.s;
      return Value{true, 0.0, {k * v.v[0], k * v.v[1], k * v.v[2]}};
    }
    case Op::Div: {
      const Value a = arg(0);
      const double k = need_scalar(arg(1));
      if (!a.vec) return scalar(a.s / k);
      return Value{true, 0.0, {a.v[0] / k, a.v[1] / k, a.v[2] / k}};
    }
    case Op::Pow: return scalar(std::pow(need_scalar(arg(0)), need_scalar(arg(1))));
    case Op::Neg: {
      const Value a = arg(0);
      if (!a.vec) return scalar(-a.s);
      return Value{true, 0.0, {-a.v[0], -a.v[1], -a.v[2]}};
    }
    case Op::Abs: return scalar(std::abs(need_scalar(arg(0))));
    case Op::Min:
    case Op::Max: {
      double r = need_scalar(arg(0));
      for (std::size_t k = 1; k < n.args.size(); ++k) {
        const double v = need_scalar(arg(k));
        r = n.op == Op::Min ? std::min(r, v) : std::max(r, v);
      }
      return scalar(r);
    }
    case Op::Sqrt: return scalar(std::sqrt(need_scalar(arg(0))));
    case Op::Exp: return scalar(std::exp(need_scalar(arg(0))));
    case Op::Log: return scalar(std::log(need_scalar(arg(0))));
    case Op::Sin: return scalar(std::sin(need_scalar(arg(0))));
    case Op::Cos: return scalar(std::cos(need_scalar(arg(0))));
    case Op::Norm: return scalar(norm(need_vector(arg(0))));
    case Op::Dot: return scalar(dot(need_vector(arg(0)), need_vector(arg(1))));
    case Op::Vec: {
      Value v{true, 0.0, {0.0, 0.0, 0.0}};
      for (std::size_t k = 0; k < n.args.size(); ++k) v.v[k] = need_scalar(arg(k));
      return v;
    }
  }
  return scalar(0.0);
}

}  // namespace

Expression Expression::parse(const std::string& text) {
  Parser p(text);
  Expression e;
  e.root_ = p.parse();
  e.text_ = text;
  e.uses_n_ = p.uses_n;
  return e;
}

double Expression::operator()(const Point& x, const Point& n) const {
  if (!root_) fail(ErrorCode::ExpressionSyntax, "empty expression");
  return need_scalar(eval(*root_, x, n));
}

}  // namespace epsbeta

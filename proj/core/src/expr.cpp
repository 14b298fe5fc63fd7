#include "foliage/expr.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <vector>

#include "foliage/errors.hpp"

namespace foliage {

struct Expr::Node {
  enum class Op { number, var, add, sub, mul, div, pow, neg, call };
  Op op = Op::number;
  double value = 0.0;
  double (*fn)(double) = nullptr;
  std::shared_ptr<const Node> a, b;

  double eval(double t) const {
    switch (op) {
      case Op::number: return value;
      case Op::var: return t;
      case Op::add: return a->eval(t) + b->eval(t);
      case Op::sub: return a->eval(t) - b->eval(t);
      case Op::mul: return a->eval(t) * b->eval(t);
      case Op::div: return a->eval(t) / b->eval(t);
      case Op::pow: return std::pow(a->eval(t), b->eval(t));
      case Op::neg: return -a->eval(t);
      case Op::call: return fn(a->eval(t));
    }
    return 0.0;
  }
};

namespace {

using NodePtr = std::shared_ptr<const Expr::Node>;
using Op = Expr::Node::Op;

NodePtr make(Op op, NodePtr a = nullptr, NodePtr b = nullptr) {
  auto n = std::make_shared<Expr::Node>();
  n->op = op;
  n->a = std::move(a);
  n->b = std::move(b);
  return n;
}

NodePtr number(double v) {
  auto n = std::make_shared<Expr::Node>();
  n->op = Op::number;
  n->value = v;
  return n;
}

struct Fn {
  const char* name;
  double (*fn)(double);
};
const Fn kFns[] = {{"exp", std::exp},   {"cosh", std::cosh}, {"sinh", std::sinh},
                   {"tanh", std::tanh}, {"sin", std::sin},   {"cos", std::cos},
                   {"sqrt", std::sqrt}, {"log", std::log},   {"abs", std::fabs}};

class Parser {
 public:
  explicit Parser(const std::string& s) : s_(s) {}

  NodePtr run() {
    NodePtr e = expression();
    skip_ws();
    if (pos_ != s_.size()) fail("trailing input");
    return e;
  }

 private:
  const std::string& s_;
  std::size_t pos_ = 0;

  [[noreturn]] void fail(const std::string& what) {
    throw ConfigError("expression '" + s_ + "': " + what + " at position " +
                      std::to_string(pos_));
  }

  void skip_ws() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }

  bool eat(char c) {
    skip_ws();
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  char peek() {
    skip_ws();
    return pos_ < s_.size() ? s_[pos_] : '\0';
  }

  NodePtr expression() {
    NodePtr e = term();
    for (;;) {
      if (eat('+')) e = make(Op::add, e, term());
      else if (eat('-')) e = make(Op::sub, e, term());
      else return e;
    }
  }

  NodePtr term() {
    NodePtr e = unary();
    for (;;) {
      if (eat('*')) e = make(Op::mul, e, unary());
      else if (eat('/')) e = make(Op::div, e, unary());
      else return e;
    }
  }

  NodePtr unary() {
    if (eat('-')) return make(Op::neg, unary());
    eat('+');
    return power();
  }

  NodePtr power() {
    NodePtr base = primary();
    if (eat('^')) return make(Op::pow, base, unary());  // right associative
    return base;
  }

  NodePtr primary() {
    skip_ws();
    if (pos_ >= s_.size()) fail("unexpected end");
    char c = s_[pos_];
    if (c == '(') {
      ++pos_;
      NodePtr e = expression();
      if (!eat(')')) fail("expected ')'");
      return e;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      const char* begin = s_.c_str() + pos_;
      char* end = nullptr;
      double v = std::strtod(begin, &end);
      if (end == begin) fail("bad number");
      pos_ += std::size_t(end - begin);
      return number(v);
    }
    if (std::isalpha(static_cast<unsigned char>(c))) {
      std::size_t start = pos_;
      while (pos_ < s_.size() &&
             (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_'))
        ++pos_;
      std::string word = s_.substr(start, pos_ - start);
      if (word == "t") return make(Op::var);
      if (word == "pi") return number(M_PI);
      if (word == "e") return number(M_E);
      for (const Fn& f : kFns) {
        if (word == f.name) {
          if (!eat('(')) fail("expected '(' after " + word);
          NodePtr arg = expression();
          if (!eat(')')) fail("expected ')'");
          auto n = std::make_shared<Expr::Node>();
          n->op = Op::call;
          n->fn = f.fn;
          n->a = arg;
          return n;
        }
      }
      fail("unknown identifier '" + word + "'");
    }
    fail(std::string("unexpected character '") + c + "'");
  }
};

}  // namespace

Expr Expr::parse(const std::string& source) {
  Expr e;
  e.node_ = Parser(source).run();
  e.src_ = source;
  return e;
}

Expr Expr::constant(double v) {
  Expr e;
  e.node_ = number(v);
  e.src_ = std::to_string(v);
  return e;
}

double Expr::operator()(double t) const {
  if (!node_) throw ConfigError("empty expression evaluated");
  return node_->eval(t);
}

}  // namespace foliage

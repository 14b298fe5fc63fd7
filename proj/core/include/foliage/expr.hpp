#pragma once

#include <memory>
#include <string>

namespace foliage {

// One-variable arithmetic expressions for warping profiles: the variable t,
// + - * / ^, parentheses, exp/cosh/sinh/tanh/sin/cos/sqrt/log/abs, and the
// constants pi and e. Parsed once, evaluated many times.
class Expr {
 public:
  Expr() = default;
  static Expr parse(const std::string& source);  // throws ConfigError
  static Expr constant(double v);

  double operator()(double t) const;
  const std::string& source() const { return src_; }
  bool empty() const { return node_ == nullptr; }

  struct Node;

 private:
  std::shared_ptr<const Node> node_;
  std::string src_;
};

}  // namespace foliage

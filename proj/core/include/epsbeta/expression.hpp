#pragma once

#include <memory>
#include <string>

#include "epsbeta/grid_cluster.hpp"

namespace epsbeta {

/// Compiled arithmetic expression over a position x and a unit direction n.
///
/// Grammar: numbers, + - * / ^, parentheses, the scalars x1..x3 and n1..n3,
/// the vectors x and n, the constants pi and e, and the functions pow, abs,
/// min, max, sqrt, exp, log, sin, cos, norm, dot and vec. Vectors support
/// addition, subtraction and scaling; everything else is scalar.
class Expression {
 public:
  struct Node;

  Expression() = default;
  static Expression parse(const std::string& text);

  double operator()(const Point& x, const Point& n) const;
  const std::string& text() const { return text_; }
  bool uses_direction() const { return uses_n_; }
  bool empty() const { return root_ == nullptr; }

 private:
  std::shared_ptr<const Node> root_;
  std::string text_;
  bool uses_n_ = false;
};

}  // namespace epsbeta

#pragma once

#include <memory>
#include <string>

#include "steklov/geometry.hpp"

namespace steklov {

namespace detail {
struct ExprNode;
}

// Positive density on the model surface, given as a small expression over
// the chart coordinates: numbers, x/y/z, + - * / ^, sin cos exp sqrt abs,
// and pi. Torus points feed (x, y); sphere points feed (x, y, z).
class Weight {
 public:
  Weight();  // constant 1
  static Weight constant(double value);
  static Weight parse(const std::string& expression);

  double operator()(const Vec3& p) const;

  // Evaluates and rejects nonpositive samples.
  double positive_at(const Vec3& p) const;

  bool is_constant() const { return constant_; }
  const std::string& expression() const { return text_; }

 private:
  std::shared_ptr<const detail::ExprNode> root_;
  std::string text_;
  bool constant_ = true;
};

}  // namespace steklov

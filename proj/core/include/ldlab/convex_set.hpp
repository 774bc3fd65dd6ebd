#pragma once

#include <functional>
#include <span>
#include <vector>

namespace ldlab {

using Point = std::vector<double>;

/// Minkowski gauge of some convex neighbourhood of 0, as a callable.
using GaugeFn = std::function<double(std::span<const double>)>;

/// Open convex neighbourhood V of 0 in R^k: an axis-aligned box
/// (-r_1, r_1) x ... x (-r_k, r_k) or a Euclidean ball of radius r.
class ConvexShape {
 public:
  enum class Kind { Box, Ball };

  static ConvexShape box(std::vector<double> radii);
  static ConvexShape interval(double radius) { return box({radius}); }
  static ConvexShape ball(int dim, double radius);

  [[nodiscard]] Kind kind() const { return kind_; }
  [[nodiscard]] int dim() const { return static_cast<int>(radii_.size()); }
  [[nodiscard]] const std::vector<double>& radii() const { return radii_; }

  /// M_V(y) = inf { t >= 0 : y in tV }.
  [[nodiscard]] double gauge(std::span<const double> y) const;
  [[nodiscard]] bool contains(std::span<const double> y) const;
  [[nodiscard]] ConvexShape scaled(double s) const;
  /// inf over the (closure of the) set of <lambda, v>; equals -support(-lambda).
  [[nodiscard]] double min_linear(std::span<const double> lambda) const;
  [[nodiscard]] GaugeFn as_gauge() const;

 private:
  ConvexShape(Kind k, std::vector<double> r) : kind_(k), radii_(std::move(r)) {}
  Kind kind_ = Kind::Box;
  std::vector<double> radii_;
};

/// Pointed convex open set C = y + V and its shrunk version
/// C(y, eps) = y + (1 - eps) V.
struct ConvexNbhd {
  Point center;
  ConvexShape shape = ConvexShape::interval(1.0);
  double shrink = 0.0;

  [[nodiscard]] ConvexShape effective_shape() const { return shape.scaled(1.0 - shrink); }
  [[nodiscard]] bool contains(std::span<const double> x) const;
  [[nodiscard]] ConvexNbhd shrunk(double eps) const;
  /// inf over the set of <lambda, x>.
  [[nodiscard]] double min_linear(std::span<const double> lambda) const;
};

/// M_V(y); free-function spelling of ConvexShape::gauge.
double gauge(const ConvexShape& v, std::span<const double> y);

/// Open-set membership guard: a point counts as inside when its gauge is
/// below 1 - kBoundaryGuard.
inline constexpr double kBoundaryGuard = 1e-12;

}  // namespace ldlab

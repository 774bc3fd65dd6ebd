#include "ldlab/convex_set.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "ldlab/numeric.hpp"

namespace ldlab {

ConvexShape ConvexShape::box(std::vector<double> radii) {
  if (radii.empty() || radii.size() > 2) throw std::invalid_argument("ConvexShape: dimension must be 1 or 2");
  for (double r : radii)
    if (!(r > 0.0)) throw std::invalid_argument("ConvexShape: radii must be positive");
  return ConvexShape(Kind::Box, std::move(radii));
}

ConvexShape ConvexShape::ball(int dim, double radius) {
  if (dim < 1 || dim > 2) throw std::invalid_argument("ConvexShape: dimension must be 1 or 2");
  if (!(radius > 0.0)) throw std::invalid_argument("ConvexShape: radius must be positive");
  return ConvexShape(Kind::Ball, std::vector<double>(static_cast<std::size_t>(dim), radius));
}

double ConvexShape::gauge(std::span<const double> y) const {
  if (y.size() != radii_.size()) throw std::invalid_argument("gauge: dimension mismatch");
  if (kind_ == Kind::Box) {
    double g = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) g = std::max(g, std::abs(y[i]) / radii_[i]);
    return g;
  }
  double s = 0.0;
  for (double v : y) s += v * v;
  return std::sqrt(s) / radii_[0];
}

bool ConvexShape::contains(std::span<const double> y) const { return gauge(y) < 1.0; }

ConvexShape ConvexShape::scaled(double s) const {
  if (!(s > 0.0)) throw std::invalid_argument("ConvexShape::scaled: factor must be positive");
  auto r = radii_;
  for (double& v : r) v *= s;
  return ConvexShape(kind_, std::move(r));
}

double ConvexShape::min_linear(std::span<const double> lambda) const {
  if (lambda.size() != radii_.size()) throw std::invalid_argument("min_linear: dimension mismatch");
  if (kind_ == Kind::Box) {
    double s = 0.0;
    for (std::size_t i = 0; i < lambda.size(); ++i) s -= std::abs(lambda[i]) * radii_[i];
    return s;
  }
  double n = 0.0;
  for (double v : lambda) n += v * v;
  return -std::sqrt(n) * radii_[0];
}

GaugeFn ConvexShape::as_gauge() const {
  return [shape = *this](std::span<const double> y) { return shape.gauge(y); };
}

double gauge(const ConvexShape& v, std::span<const double> y) { return v.gauge(y); }

bool ConvexNbhd::contains(std::span<const double> x) const {
  if (x.size() != center.size()) throw std::invalid_argument("ConvexNbhd: dimension mismatch");
  Point d(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) d[i] = x[i] - center[i];
  return shape.gauge(d) < (1.0 - shrink) * (1.0 - kBoundaryGuard);
}

ConvexNbhd ConvexNbhd::shrunk(double eps) const {
  if (!(eps >= 0.0 && eps < 1.0)) throw std::invalid_argument("ConvexNbhd::shrunk: eps must be in [0, 1)");
  ConvexNbhd c = *this;
  c.shrink = 1.0 - (1.0 - shrink) * (1.0 - eps);
  return c;
}

double ConvexNbhd::min_linear(std::span<const double> lambda) const {
  return dot(lambda, center) + effective_shape().min_linear(lambda);
}

}  // namespace ldlab

#pragma once

#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "ldlab/convex_set.hpp"

namespace ldlab {

/// Uniform grid lo, lo + h, ..., hi on one axis.
struct GridAxis {
  double lo = 0.0;
  double hi = 0.0;
  int points = 1;

  [[nodiscard]] double step() const { return points > 1 ? (hi - lo) / (points - 1) : 0.0; }
  [[nodiscard]] double at(int i) const;
  /// Index of the grid point nearest to v (clamped to the axis).
  [[nodiscard]] int nearest(double v) const;
  friend bool operator==(const GridAxis&, const GridAxis&) = default;
};

/// Symmetric axis [-half_width, half_width] with `points` entries.
GridAxis symmetric_axis(double half_width, int points);

/// Extended-real function tabulated on a uniform product grid in R^k,
/// k in {1, 2}. Values are stored row-major: index = i0 * n1 + i1.
class GridFunction {
 public:
  GridFunction() = default;
  GridFunction(std::vector<GridAxis> axes, std::vector<double> values);

  static GridFunction tabulate(std::vector<GridAxis> axes, const std::function<double(std::span<const double>)>& f);

  [[nodiscard]] int dim() const { return static_cast<int>(axes_.size()); }
  [[nodiscard]] const std::vector<GridAxis>& axes() const { return axes_; }
  [[nodiscard]] const GridAxis& axis(int i) const { return axes_[static_cast<std::size_t>(i)]; }
  [[nodiscard]] std::size_t size() const { return values_.size(); }
  [[nodiscard]] const std::vector<double>& values() const { return values_; }
  [[nodiscard]] double value(std::size_t index) const { return values_[index]; }
  [[nodiscard]] double& value(std::size_t index) { return values_[index]; }
  [[nodiscard]] Point point(std::size_t index) const;
  [[nodiscard]] std::vector<int> multi_index(std::size_t index) const;
  [[nodiscard]] std::size_t flat_index(std::span<const int> multi) const;
  /// Flat index of the grid point nearest to p.
  [[nodiscard]] std::size_t nearest(std::span<const double> p) const;

  /// Proper: no value is -inf and at least one value is finite.
  [[nodiscard]] bool proper() const;
  /// Human-readable reason when not proper (empty otherwise).
  [[nodiscard]] std::string properness_diagnostic() const;

  /// Largest absolute slope between finite neighbours along grid lines.
  [[nodiscard]] double max_finite_slope() const;
  /// Largest violation of the discrete midpoint-convexity inequality
  /// f(i) <= (f(i-1) + f(i+1)) / 2 along grid lines (0 when convex).
  [[nodiscard]] double convexity_violation() const;

  /// CSV with header (coord[, coord2], value); coordinates named
  /// `name` (k = 1) or `name`_1, `name`_2 (k = 2).
  void write_csv(std::ostream& os, const std::string& name) const;
  /// Reads the CSV written by write_csv (any coordinate names); a column
  /// named "value" ends the coordinates and later columns are ignored. Throws
  /// std::invalid_argument for malformed files or non-uniform grids.
  static GridFunction read_csv(std::istream& is);

 private:
  std::vector<GridAxis> axes_;
  std::vector<double> values_;
};

}  // namespace ldlab

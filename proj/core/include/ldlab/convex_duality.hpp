#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ldlab/grid_function.hpp"
#include "ldlab/numeric.hpp"
#include "ldlab/report.hpp"

namespace ldlab {

/// Grid conjugate f*(x) = max over grid lambda of <lambda, x> - f(lambda),
/// together with the maximising grid index for every x.
struct Conjugate {
  GridFunction function;
  std::vector<std::size_t> argmax;  // flat indices into the input grid
};

/// Discrete Legendre-Fenchel transform onto the grid given by `x_axes`.
/// k = 1: lower convex hull of the grid points followed by a monotone scan.
/// k = 2: per-axis composition of the 1-D transform (exact for any grid
/// function, since a max over a product grid factorises). Ties go to the
/// smaller lambda (lexicographically in k = 2). Throws
/// std::invalid_argument if f is not proper or dimensions disagree.
Conjugate lft(const GridFunction& f, const std::vector<GridAxis>& x_axes);

/// Direct O(|lambda grid| * |x grid|) maximisation with the same tie rule.
/// Throws BudgetExceeded if the pair count exceeds `max_pairs`.
Conjugate lft_direct(const GridFunction& f, const std::vector<GridAxis>& x_axes,
                     std::uint64_t max_pairs = std::uint64_t{1} << 30);

/// max over grid lambda of <lambda, x> - f(lambda) at one arbitrary x.
double conjugate_at(const GridFunction& f, std::span<const double> x);

/// lft(lft(f)) back on f's own grid: the convex lower envelope of f there.
GridFunction biconjugate(const GridFunction& f, const std::vector<GridAxis>& x_axes);

struct MoscoOptions {
  double m2_tolerance = 1e-6;
  double m1_tolerance = 1e-4;
  /// Half-width, in grid points, of the M2 adversary window at the start of
  /// the tail; it shrinks linearly to 0 at the last index.
  int m2_window = 5;
  /// Radius (in x units) of the M1 recovery window at the start of the
  /// tail, shrinking linearly to 0 at the last index. Negative selects a
  /// quarter of the x-range.
  double m1_radius = -1.0;
};

struct M2Entry {
  std::size_t index = 0;
  Point lambda;
  double f_value = 0.0;
  /// tail-min over m of min over the window of [f_m - f].
  double margin = 0.0;
  /// tail-min over m of f_m(lambda_m) - f(lambda) for the adversarial lambda_m.
  double raw_margin = 0.0;
  std::vector<Point> witness;  // lambda_m per tail index
};

struct M1Entry {
  std::size_t index = 0;
  Point x;
  bool interior = false;
  double target = 0.0;    // f*(x)
  double tail_max = 0.0;  // tail-max over m of f_m*(y_m)
  double slack = 0.0;     // tail_max - target
  std::vector<Point> witness;  // y_m per tail index
};

struct PropernessWitness {
  bool found = false;
  Point point;  // lambda_m is this point for every m
  double sup_value = kInf;
  std::string diagnostic;
};

struct MoscoReport {
  std::vector<int> indices;  // m values
  std::size_t tail_start = 0;  // position in `indices` where the tail begins
  PropernessWitness properness;
  std::vector<M2Entry> m2;
  std::vector<M1Entry> m1;
  double worst_m2_margin = 0.0;
  double worst_m1_slack = 0.0;
  Status m2_status = Status::Inconclusive;
  Status m1_status = Status::Inconclusive;
  Status properness_status = Status::Inconclusive;
  Status status = Status::Inconclusive;
  MoscoOptions options;
  std::vector<std::string> notes;

  [[nodiscard]] std::string to_json() const;
};

/// Witness lambda_m = 0 when every f_m(0) = 0, else the grid point that
/// minimises max_m f_m. Not found when every candidate gives +inf.
PropernessWitness uniform_properness_check(const std::vector<GridFunction>& family);

/// Tail = indices m in [M/2, M] with M the last index.
std::size_t tail_start_of(const std::vector<int>& indices);

std::vector<M2Entry> mosco_m2_check(const std::vector<GridFunction>& family, const std::vector<int>& indices,
                                    const GridFunction& limit, const MoscoOptions& options = {});

std::vector<M1Entry> mosco_m1_check(const std::vector<GridFunction>& family, const std::vector<int>& indices,
                                    const GridFunction& limit, const std::vector<GridAxis>& x_axes,
                                    const MoscoOptions& options = {});

/// Runs properness, M2 and M1 and combines their statuses.
MoscoReport mosco_report(const std::vector<GridFunction>& family, const std::vector<int>& indices,
                         const GridFunction& limit, const std::vector<GridAxis>& x_axes,
                         const MoscoOptions& options = {});

}  // namespace ldlab

#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace ldlab {

/// A site of Z^d, d in {1, 2}. For d = 1 the second coordinate is always 0.
using Site = std::array<int, 2>;

/// Sup-norm distance between two sites.
int sup_distance(const Site& a, const Site& b);

/// The cubic box corner + [0, side)^d of Z^d.
struct BoxSpec {
  Site corner{0, 0};
  int side = 1;
  int dim = 1;

  [[nodiscard]] std::int64_t cardinality() const;
  [[nodiscard]] bool contains(const Site& z) const;
  /// Sites in lexicographic order.
  [[nodiscard]] std::vector<Site> sites() const;

  friend bool operator==(const BoxSpec&, const BoxSpec&) = default;
};

BoxSpec make_box(std::span<const int> corner, int side, int dim);
BoxSpec make_box(int side, int dim);

/// Sup-norm distance between two site sets (min over pairs).
int set_distance(std::span<const Site> a, std::span<const Site> b);
int box_distance(const BoxSpec& a, const BoxSpec& b);

/// Exact rational number, used for the marginal density.
struct Rational {
  std::int64_t num = 0;
  std::int64_t den = 1;
  [[nodiscard]] double value() const { return static_cast<double>(num) / static_cast<double>(den); }
  friend bool operator==(const Rational&, const Rational&) = default;
};

/// Partial tiling of Λ(n) by k^d boxes of side m separated by gaps, with
/// corners on the sublattice (step Z)^d.
struct Tiling {
  BoxSpec outer;
  int inner_side = 0;      // m
  int gap = 0;             // g(m)
  int step = 1;            // sublattice step
  int per_axis = 0;        // k = floor(n / (m + g + step))
  int remainder = 0;       // r = n - k (m + g + step)
  std::vector<BoxSpec> sub_boxes;  // lexicographic order of the coarse index
  std::vector<Site> margin;        // S_0, sorted
  Rational rho;                    // |S_0| / n^d

  [[nodiscard]] std::int64_t covered_sites() const;

  friend bool operator==(const Tiling&, const Tiling&) = default;
};

/// Builds the deterministic tiling. Throws std::invalid_argument when no
/// sub-box fits (n < m + gap + step) or the arguments are out of range.
Tiling tile(int n, int m, int gap, int step, int dim);

/// Integer-to-integer table, e.g. the gap function g(m) or the cost c(m).
/// Lookups outside the tabulated keys throw.
class IntTable {
 public:
  IntTable() = default;
  explicit IntTable(std::vector<std::pair<int, double>> entries);
  static IntTable constant(double v);
  static IntTable from_function(std::function<double(int)> f);

  [[nodiscard]] double at(int key) const;
  [[nodiscard]] int int_at(int key) const;
  [[nodiscard]] bool has(int key) const;

 private:
  std::vector<std::pair<int, double>> entries_;
  std::function<double(int)> fn_;
};

struct RhoSample {
  int m = 0;
  int n = 0;
  int gap = 0;
  Rational rho;
  double upper_estimate = 0.0;  // d((g+l)/(m+g+l) + r/n)
};

struct RhoLimitReport {
  std::vector<RhoSample> samples;
  std::vector<double> thresholds;
  /// For each threshold, the first index after which every ρ stays below it
  /// (-1 when the final value is not below).
  std::vector<int> settled_from;
  bool monotone_nonincreasing = false;
  bool pass = false;
};

RhoLimitReport rho_limit_check(std::span<const int> m_sequence, const IntTable& gap,
                               int step, const std::function<int(int)>& n_of_m, int dim,
                               std::span<const double> thresholds);

}  // namespace ldlab

#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace ldlab {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Raised when an exact computation would exceed its configured state budget.
class BudgetExceeded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised when an iterative routine does not converge within its budget.
class ConvergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Extended-real helpers. Values live in [-inf, +inf]; NaN is never produced
// by these functions for non-NaN input.
double log_add_exp(double a, double b);
double log_sum_exp(std::span<const double> xs);

/// log(1 - e^x) for x <= 0, accurate near 0 and for very negative x.
double log1m_exp(double x);

double dot(std::span<const double> a, std::span<const double> b);

/// Uniform grid lo, lo + h, ..., hi with `points` entries (points >= 1).
std::vector<double> uniform_grid(double lo, double hi, int points);

/// SplitMix64 step; used to derive independent seed streams from one seed.
std::uint64_t split_mix64(std::uint64_t& state);
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

/// Shortest round-trip decimal representation ("%.17g"), with inf spelled
/// "inf"/"-inf". Used by all CSV/JSON emitters so outputs are byte-stable.
std::string format_double(double v);

}  // namespace ldlab

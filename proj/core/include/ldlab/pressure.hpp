#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "ldlab/field_model.hpp"
#include "ldlab/grid_function.hpp"
#include "ldlab/hypotheses.hpp"
#include "ldlab/mean_law.hpp"
#include "ldlab/report.hpp"

namespace ldlab {

/// How a pressure value was obtained.
enum class PressureMode { Exact, TransferMatrix, MonteCarlo };
const char* to_string(PressureMode m);

struct PressureValue {
  double value = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  PressureMode mode = PressureMode::Exact;
};

/// log E[ exp <lambda, sum over box of sigma> ; every site of box takes an
/// allowed atom ]. An empty mask allows every atom. Factorised for i.i.d.
/// laws, transfer matrix for Markov chains, per-block enumeration for block
/// laws; no state-space budget is involved.
double log_tilted_mass(const FieldModel& model, const BoxSpec& box, std::span<const double> lambda,
                       const std::vector<bool>& allowed = {});

/// p_Λ(n)(lambda) by the factorised / transfer-matrix route.
double pressure_finite(const FieldModel& model, int n, std::span<const double> lambda);
/// p_Λ(n)(lambda) from the exact law of the empirical mean. Throws
/// BudgetExceeded when that law exceeds the budget.
double pressure_finite_mean_law(const FieldModel& model, int n, std::span<const double> lambda,
                                const ExactBudget& budget = {});
/// Monte Carlo estimate from `samples` exact samples of Λ(n), with a 95%
/// interval from the delta method on the log of the empirical MGF.
PressureValue pressure_finite_mc(const FieldModel& model, int n, std::span<const double> lambda, int samples,
                                 std::uint64_t seed);

/// Infinite-volume pressure: closed form for i.i.d. laws, log Perron root of
/// P(a, b) e^{<lambda, b>} for Markov chains, block value for block laws.
double pressure_limit(const FieldModel& model, std::span<const double> lambda);

/// log of the Perron root of a matrix with positive entries, by power
/// iteration. Throws ConvergenceError if the relative change does not drop
/// below `tolerance` within `max_iterations`.
double log_perron_root(const Matrix& m, double tolerance = 1e-12, int max_iterations = 10000);

/// Pressure of the block law of `base` on Λ(m) conditioned on every site
/// taking an atom in `allowed`: the value p(μ_Λ(m)^K; lambda).
double conditioned_block_pressure(const FieldModel& base, int m, const std::vector<int>& allowed,
                                  std::span<const double> lambda);

/// Tabulated pressure with per-point intervals.
struct PressureCurve {
  GridFunction values;
  std::vector<double> ci_low;
  std::vector<double> ci_high;
  PressureMode mode = PressureMode::Exact;
  std::string model;
  std::string volume;  // n, or "limit"

  /// CSV with columns (lambda[_1, lambda_2], value, mode, ci_low, ci_high).
  void write_csv(std::ostream& os) const;
};

PressureCurve pressure_curve_limit(const FieldModel& model, const std::vector<GridAxis>& axes);
PressureCurve pressure_curve_finite(const FieldModel& model, int n, const std::vector<GridAxis>& axes);
PressureCurve pressure_curve_mc(const FieldModel& model, int n, const std::vector<GridAxis>& axes, int samples,
                                std::uint64_t seed);

/// |p_Λ(kj) - p_Λ(j)| <= tolerance for k in `multiples` across the grid,
/// plus the limit value against p_Λ(j). The model must be a block model.
VerificationReport block_pressure_identity_check(const FieldModel& model, const std::vector<Point>& lambdas,
                                                 const std::vector<int>& multiples = {2, 3},
                                                 double tolerance = 1e-10);

/// E[e^{eta(0)} ; D] >= e^{-t} alpha P(D) for a scalar field eta over
/// conditioning cylinders D on the given sites (0 excluded): every atom
/// pattern when there are at most `max_patterns`, plus random convex
/// cylinders.
VerificationReport residual_beta_check(const FieldModel& scalar_model, const std::vector<Site>& sites, double t,
                                       double alpha, const EventCheckOptions& options = {},
                                       std::size_t max_patterns = 4096);

/// Parameters entering the pressure subadditivity inequality.
struct PressureSubadditivityParams {
  int gap = 0;
  double cost = 0.0;
  int step = 1;
  double t = 1.0;      // local control of <lambda, sigma> at V = (-1, 1)
  double alpha = 1.0;
};

/// Parameters of the scalar field <lambda, sigma> read from the model:
/// (g, c) at m and the local-control rule of the affine image at (-1, 1).
PressureSubadditivityParams scalar_field_params(const FieldModel& model, std::span<const double> lambda, int m);

/// p_n >= (1 - rho) p_m - c/|Λ(m)| - rho (t - log alpha).
VerificationReport pressure_subadditivity_check(const FieldModel& model, std::span<const double> lambda, int m, int n,
                                                const PressureSubadditivityParams& params, double tolerance = 1e-9);

/// Largest violation of midpoint convexity of p_Λ(n) over the curve grid.
double pressure_convexity_violation(const PressureCurve& curve);

}  // namespace ldlab

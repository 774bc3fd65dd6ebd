#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "ldlab/convex_set.hpp"
#include "ldlab/field_model.hpp"
#include "ldlab/grid_function.hpp"
#include "ldlab/hypotheses.hpp"
#include "ldlab/mean_law.hpp"
#include "ldlab/report.hpp"

namespace ldlab {

/// Lazily computed exact mean laws of one model, keyed by box side.
class MeanLawCache {
 public:
  explicit MeanLawCache(const FieldModel& model, ExactBudget budget = {}) : model_(&model), budget_(budget) {}
  /// The cache refers to the model; a temporary would dangle.
  explicit MeanLawCache(FieldModel&&, ExactBudget = {}) = delete;
  const MeanLaw& get(int n);
  [[nodiscard]] const FieldModel& model() const { return *model_; }
  /// (1/|Λ(n)|) log P(mean over Λ(n) in set).
  double log_prob_over_volume(int n, const ConvexNbhd& set);

 private:
  const FieldModel* model_;
  ExactBudget budget_;
  std::map<int, MeanLaw> laws_;
};

/// Per-volume values (1/|Λ(n)|) log P(mean over Λ(n) in x + V).
struct EntropyEstimate {
  Point x;
  ConvexShape shape = ConvexShape::interval(1.0);
  std::vector<int> volumes;
  std::vector<double> values;
  std::vector<double> std_errors;  // 0 in exact mode
  double s_est = 0.0;              // value at the largest volume
  double liminf_proxy = 0.0;       // min over the second half of the volumes
  double tail_oscillation = 0.0;   // max - min over the same suffix
  bool minus_infinity = false;     // every volume gave probability 0
  EvalMode mode = EvalMode::Exact;
};

EntropyEstimate entropy_estimate(MeanLawCache& laws, const Point& x, const ConvexShape& shape,
                                 const std::vector<int>& volumes);
EntropyEstimate entropy_estimate(const FieldModel& model, const Point& x, const ConvexShape& shape,
                                 const std::vector<int>& volumes, const ExactBudget& budget = {});
/// Monte Carlo frequencies over `samples` exact samples per volume.
EntropyEstimate entropy_estimate_mc(const FieldModel& model, const Point& x, const ConvexShape& shape,
                                    const std::vector<int>& volumes, int samples, std::uint64_t seed);

/// CSV with columns (x[_1, x_2], radius, n, log_prob_over_volume, mode);
/// radius is the largest radius of the neighbourhood shape.
void write_entropy_csv(std::ostream& os, const std::vector<EntropyEstimate>& estimates);

/// Decoupling and local-control constants entering the tiling inequalities.
struct TilingParams {
  int gap = 0;
  double cost = 0.0;
  int step = 1;
  double t = 1.0;      // local control of the field centred at the target point
  double alpha = 1.0;
};

/// (g, c) at m, the step of the model, and (t, alpha) of the translated
/// field eta - y at the neighbourhood shape V.
TilingParams tiling_params(const FieldModel& model, const Point& y, const ConvexShape& shape, int m);

/// Checks, for C = y + V and the tiling of Λ(n) by side-m boxes,
///   (1/|Λ(n)|) log P(m_Λ(n) in C) >= (1/|Λ(m)|) log P(m_Λ(m) in C(y, eps))
///                                    - c/|Λ(m)| + rho log alpha,
/// together with the delta form (RHS = first term - delta). A record's
/// premise holds when eps / rho > t.
VerificationReport subadditive_lemma_check(MeanLawCache& laws, const ConvexNbhd& c, double eps, double delta, int m,
                                           int n, const TilingParams& params, double tolerance = 1e-9);

/// Finite-volume midpoint concavity: with A = (x1 + x2)/2 + V,
/// A_x = x1 + (1 - eps) V and A_y = x2 + (1 - eps) V, sub-boxes alternate
/// between A_x and A_y (an unpaired last box joins the margin) and
///   (1/N) log P(m_Λ(n) in A) >= rho' log alpha - c (K - 1)/N
///        + (K/2)(|Λ(m)|/N) [log P(m_Λ(m) in A_x) + log P(m_Λ(m) in A_y)].
/// The tiling correction delta(n) = (s_m(A_x) + s_m(A_y))/2 - RHS is
/// reported as a metric.
VerificationReport concavity_check(MeanLawCache& laws, const Point& x1, const Point& x2, const ConvexShape& shape,
                                   double eps, int m, int n, const TilingParams& params, double tolerance = 1e-9);

/// P(m_Λ(n) in A) <= exp(-|Λ(n)| sup_lambda (inf_A <lambda, x> - p_Λ(n)(lambda)))
/// with the sup over the grid points of `lambda_axes`.
VerificationReport chebyshev_upper_check(MeanLawCache& laws, const ConvexNbhd& a, int n,
                                         const std::vector<GridAxis>& lambda_axes, double tolerance = 1e-12);

/// s_est(x) <= -p*_grid(x) + margin for every estimate, where p*_grid is the
/// grid conjugate of `pressure`.
VerificationReport upper_bound_check(const std::vector<EntropyEstimate>& estimates, const GridFunction& pressure,
                                     double margin, const std::string& model_name, double tolerance = 1e-12);

}  // namespace ldlab

#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "ldlab/convex_set.hpp"
#include "ldlab/lattice_tiling.hpp"

namespace ldlab {

using Matrix = std::vector<std::vector<double>>;

/// Y = R^k (k in {1, 2}) with a finite list of atoms.
struct ValueSpace {
  int dim = 1;
  std::vector<Point> atoms;
  std::vector<std::string> labels;

  [[nodiscard]] int size() const { return static_cast<int>(atoms.size()); }
  /// Throws std::invalid_argument if atoms are empty, of the wrong
  /// dimension, or (when require_distinct) not pairwise distinct.
  void validate(bool require_distinct = true) const;
};

ValueSpace scalar_values(const std::vector<double>& atoms);

/// Explicit law of a finite box restriction: configurations list atom
/// indices in the lexicographic site order of Λ(side).
struct BlockLaw {
  int side = 1;
  int dim = 1;
  std::vector<std::vector<int>> configs;
  std::vector<double> probs;
};

/// y -> A y + b, A given row-major with `rows` output coordinates.
struct AffineMap {
  Matrix matrix;  // rows x cols
  Point offset;   // size rows

  static AffineMap scaling(double s, int dim = 1);
  static AffineMap translation(Point y0);
  static AffineMap linear_functional(Point lambda);

  [[nodiscard]] int in_dim() const { return matrix.empty() ? 0 : static_cast<int>(matrix.front().size()); }
  [[nodiscard]] int out_dim() const { return static_cast<int>(matrix.size()); }
  [[nodiscard]] Point apply(std::span<const double> y) const;
  [[nodiscard]] Point apply_linear(std::span<const double> y) const;
  [[nodiscard]] int rank() const;
};

/// (g, c) decoupling parameters.
struct DecouplingParams {
  IntTable gap;
  IntTable cost;
};

/// Local control at one neighbourhood V: P(eta(z) in t V ; eta_S in D) >= alpha P(eta_S in D).
struct LocalControlEntry {
  double t = 1.0;
  double alpha = 1.0;
};

/// V -> (t(V), alpha(V)), where V is handed over through its gauge.
using LocalControlRule = std::function<LocalControlEntry(const GaugeFn&)>;

struct ModelParams {
  DecouplingParams decoupling;
  LocalControlRule local_control;
};

/// Sure-event local control: t(V) just above max_a M_V(a), alpha = 1.
LocalControlRule sure_event_local_control(const ValueSpace& values);

/// A lattice-field law with exact finite-dimensional marginals.
class FieldModel {
 public:
  enum class Kind { Iid, Markov, AffineImage, ProductOfMarginals, Conditioned };
  /// How the law over atom indices is represented.
  enum class Law { Iid, Markov, Block };

  static FieldModel iid(ValueSpace values, std::vector<double> weights, int lattice_dim = 1);
  /// Stationary Markov chain on Z (d = 1). Every entry of the transition
  /// matrix must be positive (Doeblin minorization).
  static FieldModel markov(ValueSpace values, Matrix transition);

  [[nodiscard]] Kind kind() const { return kind_; }
  [[nodiscard]] Law law() const { return law_; }
  [[nodiscard]] const ValueSpace& values() const { return values_; }
  [[nodiscard]] int num_atoms() const { return values_.size(); }
  [[nodiscard]] int value_dim() const { return values_.dim; }
  [[nodiscard]] int lattice_dim() const { return lattice_dim_; }
  [[nodiscard]] int step() const { return step_; }

  [[nodiscard]] const std::vector<double>& weights() const { return weights_; }
  [[nodiscard]] const Matrix& transition() const { return transition_; }
  [[nodiscard]] const std::vector<double>& stationary() const { return stationary_; }
  [[nodiscard]] double doeblin_delta() const { return doeblin_delta_; }
  [[nodiscard]] const BlockLaw& block_law() const { return block_; }
  [[nodiscard]] int block_side() const { return block_.side; }

  [[nodiscard]] const ModelParams& params() const { return params_; }
  void set_params(ModelParams p) { params_ = std::move(p); }

  [[nodiscard]] const FieldModel* base() const { return base_.get(); }
  [[nodiscard]] std::string describe() const;

  /// Marginal law of one site (the block-averaged site law for block models).
  [[nodiscard]] std::vector<double> site_marginal(const Site& z) const;

  friend FieldModel affine_image(const FieldModel&, const AffineMap&);
  friend FieldModel product_of_marginals(const FieldModel&, int);
  friend FieldModel conditioned(const FieldModel&, int, const std::vector<int>&);

 private:
  FieldModel() = default;

  Kind kind_ = Kind::Iid;
  Law law_ = Law::Iid;
  ValueSpace values_;
  int lattice_dim_ = 1;
  int step_ = 1;
  std::vector<double> weights_;
  Matrix transition_;
  std::vector<double> stationary_;
  double doeblin_delta_ = 0.0;
  BlockLaw block_;
  ModelParams params_;
  std::shared_ptr<const FieldModel> base_;
};

/// f(eta) for f(y) = A y + b. Decoupling parameters are unchanged; local
/// control becomes V -> t(A^{-1} V) for the linear part and then
/// t(V) + M_V(-b) for the translation.
FieldModel affine_image(const FieldModel& model, const AffineMap& f);

/// (mu restricted to Λ(m)) tensored over the translates m Z^d.
FieldModel product_of_marginals(const FieldModel& model, int m);

/// Block law conditioned on every site of Λ(m) taking values in the atom
/// subset K. Throws std::domain_error when that event has zero mass.
FieldModel conditioned(const FieldModel& model, int m, const std::vector<int>& allowed_atoms);

/// P(every site of Λ(m) takes an atom in K) under the model.
double conditioning_mass(const FieldModel& model, int m, const std::vector<int>& allowed_atoms);

/// Explicit law of the restriction to a box. Throws BudgetExceeded when the
/// number of configurations exceeds `budget`.
BlockLaw restriction_law(const FieldModel& model, const BoxSpec& box, std::size_t budget = std::size_t{1} << 22);

struct Configuration {
  std::vector<Site> sites;  // lexicographic
  std::vector<int> atoms;
};

/// Exact sample of the restriction to `box`; a pure function of (model, box, seed).
Configuration sample(const FieldModel& model, const BoxSpec& box, std::uint64_t seed);

/// Doeblin certificate of a Markov model.
struct DoeblinCertificate {
  double delta = 0.0;      // min entry of P
  double kappa = 0.0;      // min_b min_a P(a,b) / max_a P(a,b)
  double cost = 0.0;       // -2 log delta
  double sharp_cost = 0.0; // -2 log kappa
  int gap = 1;
  std::vector<double> column_min;
};

DoeblinCertificate doeblin_certificate(const FieldModel& markov_model);

/// Local control for a Doeblin chain at a fixed scale t:
/// alpha(V) = kappa * sum over atoms b with M_V(b) < t of min_a P(a, b).
LocalControlRule doeblin_local_control(const FieldModel& markov_model, double t);

/// Stationary distribution of an irreducible stochastic matrix.
std::vector<double> stationary_distribution(const Matrix& p);

}  // namespace ldlab

#pragma once

#include <cstdint>
#include <optional>
#include <unordered_map>
#include <vector>

#include "ldlab/field_model.hpp"

namespace ldlab {

/// State budget for exact enumeration / dynamic programming.
struct ExactBudget {
  std::size_t max_states = std::size_t{1} << 22;
};

/// Packs per-atom counts into one 64-bit key. Keys add without carries as
/// long as no count exceeds the capacity chosen at construction.
class CountCodec {
 public:
  CountCodec() = default;
  CountCodec(int num_atoms, std::int64_t max_count);

  [[nodiscard]] int num_atoms() const { return atoms_; }
  [[nodiscard]] std::uint64_t unit(int atom) const;
  [[nodiscard]] std::uint64_t encode(std::span<const int> counts) const;
  void decode(std::uint64_t key, std::span<int> counts) const;

 private:
  int atoms_ = 0;
  int bits_ = 1;
};

/// Law (log-probabilities) of the atom-count vector over a set of sites,
/// possibly restricted to a cylinder event (then it does not sum to 1).
struct CountLaw {
  CountCodec codec;
  std::int64_t sites = 0;
  std::unordered_map<std::uint64_t, double> log_prob;

  [[nodiscard]] double log_total() const;
};

CountLaw convolve(const CountLaw& a, const CountLaw& b, const ExactBudget& budget = {});

/// Exact law of the empirical mean over a box, merged over equal means.
struct MeanLaw {
  int value_dim = 1;
  std::int64_t sites = 0;
  std::vector<Point> means;        // sorted lexicographically
  std::vector<double> log_probs;

  [[nodiscard]] double total_mass() const;
  [[nodiscard]] double log_prob_in(const ConvexNbhd& set) const;
  /// (1/|Λ|) log E exp <lambda, sum over Λ>.
  [[nodiscard]] double pressure(std::span<const double> lambda) const;
};

MeanLaw to_mean_law(const CountLaw& counts, const ValueSpace& values);

/// Law of the empirical mean over Λ(n) (corner 0). Multinomial enumeration
/// for i.i.d. models, forward dynamic programming over (position, counts)
/// for Markov chains, block convolution for block models.
MeanLaw mean_law_exact(const FieldModel& model, int n, const ExactBudget& budget = {});
CountLaw count_law_exact(const FieldModel& model, const BoxSpec& box, const ExactBudget& budget = {});

/// Per-site restriction: the atom must be one of the allowed ones.
struct SiteConstraint {
  Site site{0, 0};
  std::vector<bool> allowed;
};

/// Product ("cylinder") event over finitely many sites.
struct CylinderEvent {
  std::vector<SiteConstraint> constraints;
};

/// Event {mean over `sites` lies in `set`}.
struct MeanConstraint {
  std::vector<Site> sites;
  ConvexNbhd set;
};

/// Joint count law of `counted` sites on the cylinder event: entries sum to
/// P(cylinder) and are keyed by the counts over `counted`.
CountLaw joint_count_law(const FieldModel& model, const CylinderEvent& event,
                         std::span<const Site> counted, const ExactBudget& budget = {});

/// Exact log P(cylinder event [and mean constraint]).
double log_probability(const FieldModel& model, const CylinderEvent& event,
                       const std::optional<MeanConstraint>& mean = std::nullopt,
                       const ExactBudget& budget = {});

/// log P(every site of `box` takes an atom in the allowed subset).
double log_conditioning_mass(const FieldModel& model, const BoxSpec& box, const std::vector<int>& allowed_atoms,
                             const ExactBudget& budget = {});

/// Empirical means over Λ(n) of `samples` exact samples; sample i is drawn
/// with seed derive_seed(seed, i).
std::vector<Point> sample_means(const FieldModel& model, int n, int samples, std::uint64_t seed);

/// Allowed-atom mask for an open box in value space.
std::vector<bool> atoms_in(const ValueSpace& values, const ConvexNbhd& box);

}  // namespace ldlab

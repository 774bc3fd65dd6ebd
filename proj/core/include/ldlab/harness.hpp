#pragma once

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "ldlab/config.hpp"
#include "ldlab/convex_duality.hpp"
#include "ldlab/entropy_ldp.hpp"
#include "ldlab/pressure.hpp"
#include "ldlab/report.hpp"

namespace ldlab {

/// A named output file produced by a run.
struct Artifact {
  std::string name;
  std::string content;
};

/// Outcome of one harness command. `artifacts` always ends with
/// "<command>_report.json", which embeds every report sorted by id.
struct RunResult {
  std::string command;
  /// Combined with every report status when the run finishes.
  Status status = Status::Pass;
  std::vector<VerificationReport> reports;
  /// Extra JSON documents embedded verbatim under their key.
  std::vector<std::pair<std::string, std::string>> documents;
  std::vector<Artifact> artifacts;
  std::vector<std::string> summary;

  [[nodiscard]] const Artifact* artifact(const std::string& name) const;
};

/// Exit code for a status: 0 pass, 1 fail, 2 inconclusive.
int exit_code(Status s);
inline constexpr int kConfigErrorExit = 3;

/// The block-mass requirement of a truncation family is not met.
class MassConditionError : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

struct DualityRow {
  Point x;
  double s_est = 0.0;
  double minus_pstar = 0.0;
  double gap = 0.0;
  double tolerance = 0.0;
  double std_error = 0.0;
  Status status = Status::Inconclusive;
};

/// CSV with columns (x[_1, x_2], s_est, minus_pstar, gap, tolerance, status).
void write_duality_csv(std::ostream& os, const std::vector<DualityRow>& rows);

/// Pressure limit on the lambda grid, its grid conjugate at every x, and
/// per-x entropy estimates compared both ways: s_est <= -p* + margin at
/// every (x, radius, n) and |s_est + p*| <= tolerance with s_est taken at
/// the largest volume and smallest radius.
RunResult verify_duality(const ExperimentConfig& cfg);

struct MassRow {
  int m = 0;
  int allowed = 0;
  int block_side = 0;
  double mass = 0.0;
  double bound = 0.0;
};

/// K_m = first min(|atoms|, m + K_offset) atoms, for m = 1..M.
std::vector<int> truncation_atoms(const FieldModel& base, int m, int k_offset);

/// Block masses nu(K_m^{Λ(m + g(m) + l)}) against 1 - 1/(m |Λ(m + g(m) + l)|).
/// Throws MassConditionError, quoting the measured masses, when any fails.
std::vector<MassRow> truncation_masses(const FieldModel& base, int max_index, int k_offset);

/// Pressures f_m of the conditioned block models, the base pressure as the
/// limit, properness / M2 / M1, and the block identity where the block law
/// is small enough to enumerate.
RunResult run_mosco_pipeline(const ExperimentConfig& cfg);

RunResult run_tiling(const ExperimentConfig& cfg);
RunResult run_check_hypotheses(const ExperimentConfig& cfg);
RunResult run_pressure(const ExperimentConfig& cfg);
RunResult run_entropy(const ExperimentConfig& cfg);
RunResult run_chebyshev(const ExperimentConfig& cfg);
RunResult run_subadditive(const ExperimentConfig& cfg);

/// Grid conjugate of a GridFunction CSV onto its own grid (or the given
/// axes). An improper input yields a failed result carrying the
/// properness diagnostic.
RunResult run_lft(std::istream& input, const std::vector<GridAxis>& x_axes = {});

}  // namespace ldlab

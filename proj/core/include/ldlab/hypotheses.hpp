#pragma once

#include <cstdint>
#include <optional>

#include "ldlab/field_model.hpp"
#include "ldlab/mean_law.hpp"
#include "ldlab/report.hpp"

namespace ldlab {

enum class EvalMode { Exact, MonteCarlo };
const char* to_string(EvalMode m);
EvalMode parse_eval_mode(const std::string& s);

/// Options shared by the randomized hypothesis verifiers.
struct EventCheckOptions {
  int events = 200;
  std::uint64_t seed = 1;
  EvalMode mode = EvalMode::Exact;
  int mc_samples = 20000;
  /// Absolute tolerance on log-slack in exact mode (floating roundoff).
  double tolerance = 1e-12;
  /// Largest number of sites in the far set S.
  int max_far_sites = 4;
  /// Probability that the box event is a mean event {m_Λ in A} rather than a
  /// per-site cylinder.
  double mean_event_fraction = 0.5;
};

/// Randomized test of
///   P(eta_Λ(z;n) in C, eta_S in D) >= e^{-c} P(eta_Λ(z;n) in C) P(eta_S in D)
/// for dist(S, Λ(z;n)) > gap.
VerificationReport check_decoupling(const FieldModel& model, int n, int gap, double cost,
                                    const EventCheckOptions& options = {});

/// Same, with (g, c) read from the model's parameters at n.
VerificationReport check_decoupling(const FieldModel& model, int n, const EventCheckOptions& options = {});

/// Randomized test of P(eta(z) in tV ; eta_S in D) >= alpha P(eta_S in D).
VerificationReport check_local_control(const FieldModel& model, const ConvexShape& v, double t, double alpha,
                                       const EventCheckOptions& options = {});

/// Same, with (t, alpha) = the model's local-control rule evaluated at V.
VerificationReport check_local_control(const FieldModel& model, const ConvexShape& v,
                                       const EventCheckOptions& options = {});

/// Monte Carlo estimate of a cylinder [+ mean] event probability from
/// `samples` exact samples of the bounding box of the event.
struct McEstimate {
  double p = 0.0;
  double std_error = 0.0;
  int hits = 0;
  int samples = 0;
};

}  // namespace ldlab

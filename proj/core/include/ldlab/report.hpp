#pragma once

#include <string>
#include <utility>
#include <vector>

namespace ldlab {

inline constexpr const char* kReportSchemaVersion = "1.0";

enum class Status { Pass, Fail, Inconclusive };

const char* to_string(Status s);
/// Conjunction: any Fail -> Fail, else any Inconclusive -> Inconclusive.
Status combine(Status a, Status b);

/// lhs - rhs on extended reals, with x >= -inf and +inf >= y counted as
/// satisfied (+inf slack).
double inequality_slack(double lhs, double rhs);

/// One evaluated instance of an inequality LHS >= RHS.
struct CheckRecord {
  std::string label;
  double lhs = 0.0;
  double rhs = 0.0;
  double slack = 0.0;        // lhs - rhs
  double std_error = 0.0;    // 0 in exact mode
  bool premise_holds = true; // whether the hypotheses of the inequality are met
  Status status = Status::Pass;
};

/// Structured pass/fail record with measured slacks.
struct VerificationReport {
  std::string id;
  std::string model;
  std::string mode = "exact";
  double tolerance = 0.0;
  std::vector<CheckRecord> records;
  std::vector<std::pair<std::string, double>> metrics;
  std::vector<std::string> notes;
  Status status = Status::Inconclusive;
  double worst_slack = 0.0;
  int event_count = 0;

  /// Appends a record, classifying it against the tolerance:
  /// slack >= -(tolerance + 3 sigma) passes; a violation outside the
  /// premise is Inconclusive rather than Fail.
  CheckRecord& add(CheckRecord r);
  void metric(std::string key, double value);
  /// Recomputes worst slack, event count and overall status. A report with
  /// no records is Inconclusive.
  void finalize();

  [[nodiscard]] std::string to_json() const;
};

}  // namespace ldlab

#include "ldlab/report.hpp"

#include <algorithm>
#include <cmath>

#include "json.hpp"
#include "ldlab/numeric.hpp"

namespace ldlab {

const char* to_string(Status s) {
  switch (s) {
    case Status::Pass: return "pass";
    case Status::Fail: return "fail";
    case Status::Inconclusive: return "inconclusive";
  }
  return "?";
}

Status combine(Status a, Status b) {
  if (a == Status::Fail || b == Status::Fail) return Status::Fail;
  if (a == Status::Inconclusive || b == Status::Inconclusive) return Status::Inconclusive;
  return Status::Pass;
}

double inequality_slack(double lhs, double rhs) {
  if (rhs == -kInf || lhs == kInf) return kInf;
  return lhs - rhs;
}

CheckRecord& VerificationReport::add(CheckRecord r) {
  if (std::isnan(r.slack)) {
    r.status = Status::Inconclusive;
  } else if (r.slack >= -(tolerance + 3.0 * r.std_error)) {
    r.status = Status::Pass;
  } else {
    r.status = r.premise_holds ? Status::Fail : Status::Inconclusive;
  }
  records.push_back(std::move(r));
  return records.back();
}

void VerificationReport::metric(std::string key, double value) {
  for (auto& [k, v] : metrics)
    if (k == key) {
      v = value;
      return;
    }
  metrics.emplace_back(std::move(key), value);
}

void VerificationReport::finalize() {
  event_count = static_cast<int>(records.size());
  worst_slack = kInf;
  status = records.empty() ? Status::Inconclusive : Status::Pass;
  for (const auto& r : records) {
    if (!std::isnan(r.slack)) worst_slack = std::min(worst_slack, r.slack);
    status = combine(status, r.status);
  }
}

namespace {

nlohmann::ordered_json num(double v) {
  if (std::isfinite(v)) return v;
  return format_double(v);
}

}  // namespace

std::string VerificationReport::to_json() const {
  nlohmann::ordered_json j;
  j["schema_version"] = kReportSchemaVersion;
  j["inequality_id"] = id;
  j["model"] = model;
  j["mode"] = mode;
  j["event_count"] = event_count;
  j["worst_slack"] = num(worst_slack);
  j["tolerance"] = num(tolerance);
  j["status"] = to_string(status);
  nlohmann::ordered_json m = nlohmann::ordered_json::object();
  for (const auto& [k, v] : metrics) m[k] = num(v);
  j["metrics"] = m;
  j["notes"] = notes;
  nlohmann::ordered_json recs = nlohmann::ordered_json::array();
  for (const auto& r : records) {
    nlohmann::ordered_json x;
    x["label"] = r.label;
    x["lhs"] = num(r.lhs);
    x["rhs"] = num(r.rhs);
    x["slack"] = num(r.slack);
    x["std_error"] = num(r.std_error);
    x["premise_holds"] = r.premise_holds;
    x["status"] = to_string(r.status);
    recs.push_back(std::move(x));
  }
  j["records"] = recs;
  return j.dump(2);
}

}  // namespace ldlab

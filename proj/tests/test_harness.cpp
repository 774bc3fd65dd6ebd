#include <cmath>
#include <sstream>
#include <string>

#include "doctest.h"
#include "json.hpp"
#include "ldlab/harness.hpp"
#include "ldlab/numeric.hpp"

using namespace ldlab;

namespace {

std::string config_path(const std::string& name) { return std::string(LDLAB_CONFIG_DIR) + "/" + name; }

nlohmann::json report_json(const RunResult& r) {
  const Artifact* a = r.artifact(r.command + "_report.json");
  REQUIRE(a != nullptr);
  return nlohmann::json::parse(a->content);
}

}  // namespace

TEST_CASE("exit codes") {
  CHECK(exit_code(Status::Pass) == 0);
  CHECK(exit_code(Status::Fail) == 1);
  CHECK(exit_code(Status::Inconclusive) == 2);
  CHECK(kConfigErrorExit == 3);
}

TEST_CASE("verify on the Rademacher field: artifacts, report and duality rows") {
  const RunResult r = verify_duality(load_experiment(config_path("rademacher.cfg")));
  CHECK(r.status == Status::Pass);
  for (const char* name : {"pressure_limit.csv", "conjugate.csv", "entropy.csv", "duality.csv", "verify_report.json"})
    CHECK(r.artifact(name) != nullptr);
  CHECK(r.artifacts.back().name == "verify_report.json");

  const auto j = report_json(r);
  CHECK(j["schema_version"] == "1.0");
  CHECK(j["command"] == "verify");
  CHECK(j["status"] == "pass");
  CHECK(j["seed"] == 1);
  std::vector<std::string> ids;
  for (const auto& rep : j["reports"]) ids.push_back(rep["inequality_id"]);
  CHECK(std::is_sorted(ids.begin(), ids.end()));
  CHECK(std::find(ids.begin(), ids.end(), "duality_gap") != ids.end());

  const std::string csv = r.artifact("duality.csv")->content;
  CHECK(csv.rfind("x,s_est,minus_pstar,gap,tolerance,status\n", 0) == 0);
  std::istringstream is(csv);
  std::string line;
  std::getline(is, line);
  int rows = 0;
  while (std::getline(is, line)) {
    ++rows;
    double x = 0, s = 0, mp = 0, gap = 0;
    char c = 0;
    std::istringstream ls(line);
    ls >> x >> c >> s >> c >> mp >> c >> gap;
    // -p*(x) for the fair sign field is minus the Cramer rate.
    const double rate = 0.5 * ((1 + x) * std::log1p(x) + (1 - x) * std::log1p(-x));
    CHECK(mp == doctest::Approx(-rate).epsilon(1e-3));
    CHECK(std::abs(gap) <= 0.02);
  }
  CHECK(rows == 5);
}

TEST_CASE("harness runs are byte-for-byte reproducible") {
  const ExperimentConfig cfg = load_experiment(config_path("doeblin.cfg"));
  const RunResult a = verify_duality(cfg);
  const RunResult b = verify_duality(cfg);
  REQUIRE(a.artifacts.size() == b.artifacts.size());
  for (std::size_t i = 0; i < a.artifacts.size(); ++i) {
    CHECK(a.artifacts[i].name == b.artifacts[i].name);
    CHECK(a.artifacts[i].content == b.artifacts[i].content);
  }
}

TEST_CASE("truncation atoms and the block mass condition") {
  const ExperimentConfig cfg = load_experiment(config_path("mosco_family.cfg"));
  CHECK(truncation_atoms(cfg.field(), 1, 4) == std::vector<int>{0, 1, 2, 3, 4});
  CHECK(truncation_atoms(cfg.field(), 9, 4).size() == 10);
  const auto rows = truncation_masses(cfg.field(), 12, 4);
  REQUIRE(rows.size() == 12);
  for (const auto& r : rows) {
    CHECK(r.mass >= r.bound);
    // i.i.d. geometric weights: mass = (1 - q^|K|)^|box| / (1 - q^10)^|box|.
    const double per_site = (1.0 - std::pow(0.5, r.allowed)) / (1.0 - std::pow(0.5, 10));
    CHECK(r.mass == doctest::Approx(std::pow(per_site, r.block_side)).epsilon(1e-12));
  }
  CHECK_THROWS_AS(truncation_masses(cfg.field(), 12, 0), MassConditionError);
}

TEST_CASE("Mosco pipeline on the truncated geometric family") {
  const RunResult r = run_mosco_pipeline(load_experiment(config_path("mosco_family.cfg")));
  CHECK(r.status == Status::Pass);
  CHECK(r.artifact("mosco_masses.csv") != nullptr);
  CHECK(r.artifact("mosco_family.csv") != nullptr);
  const auto j = report_json(r);
  CHECK(j["mosco"]["status"] == "pass");
  CHECK(j["mosco"]["uniform_properness"]["witness"] == 0.0);
  CHECK(j["mosco"]["tail"]["from"] == 6);
  CHECK_THROWS_AS(run_mosco_pipeline(load_experiment(config_path("mosco_reject.cfg"))), MassConditionError);
}

TEST_CASE("tiling command reports the worked example and the density limit") {
  const RunResult r = run_tiling(load_experiment(config_path("rademacher.cfg")));
  CHECK(r.status == Status::Pass);
  const auto j = report_json(r);
  const auto& t = j["tiling"];
  CHECK(t["n"] == 10);
  CHECK(t["per_axis"] == 2);
  CHECK(t["sub_box_corners"] == nlohmann::json::parse("[[0], [4]]"));
  CHECK(t["rho_num"].get<double>() / t["rho_den"].get<double>() == doctest::Approx(0.6));
  CHECK(r.artifact("rho_table.csv") != nullptr);
}

TEST_CASE("lft command: pressure CSV round trip, improper and malformed inputs") {
  const RunResult p = run_pressure(load_experiment(config_path("rademacher.cfg")));
  CHECK(p.status == Status::Pass);
  const Artifact* curve = p.artifact("pressure_limit.csv");
  REQUIRE(curve != nullptr);
  std::istringstream in(curve->content);
  const RunResult l = run_lft(in, {GridAxis{-0.9, 0.9, 19}});
  CHECK(l.status == Status::Pass);
  const Artifact* conj = l.artifact("conjugate.csv");
  REQUIRE(conj != nullptr);
  std::istringstream cin(conj->content);
  const GridFunction g = GridFunction::read_csv(cin);
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double x = g.point(i)[0];
    const double rate = 0.5 * ((1 + x) * std::log1p(x) + (1 - x) * std::log1p(-x));
    CHECK(std::abs(g.value(i) - rate) <= 3.2e-4);
  }

  std::istringstream improper("lambda,value\n0,0\n1,-inf\n");
  const RunResult bad = run_lft(improper);
  CHECK(bad.status == Status::Fail);
  CHECK(report_json(bad)["reports"][0]["notes"].dump().find("-inf") != std::string::npos);
  std::istringstream malformed("lambda,value\n0,zero\n");
  CHECK_THROWS_AS(run_lft(malformed), ConfigError);
}

TEST_CASE("summary lines name every report") {
  const RunResult r = run_check_hypotheses(load_experiment(config_path("doeblin.cfg")));
  CHECK(r.status == Status::Pass);
  REQUIRE(r.summary.size() == r.reports.size() + 1);
  for (std::size_t i = 0; i < r.reports.size(); ++i) CHECK(r.summary[i].rfind(r.reports[i].id + ": pass", 0) == 0);
  CHECK(r.summary.back() == "check-hypotheses: pass");
}

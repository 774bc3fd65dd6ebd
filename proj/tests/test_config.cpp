#include <cmath>
#include <filesystem>
#include <string>

#include "doctest.h"
#include "ldlab/config.hpp"
#include "ldlab/numeric.hpp"

using namespace ldlab;

namespace {

std::string config_path(const std::string& name) { return std::string(LDLAB_CONFIG_DIR) + "/" + name; }

ExperimentConfig from_text(const std::string& text) { return experiment_from_config(IniDocument::parse_string(text)); }

/// Runs `f`, which must throw ConfigError, and returns the error.
template <class F>
ConfigError config_error(F&& f) {
  try {
    f();
  } catch (const ConfigError& e) {
    return e;
  }
  FAIL("expected a ConfigError");
  return ConfigError("unreachable");
}

const char* kMinimal = "[model]\nkind = iid\natoms = -1, 1\nweights = uniform\n";

}  // namespace

TEST_CASE("INI syntax: comments, whitespace, typed getters") {
  const IniDocument doc = IniDocument::parse_string(
      "; leading comment\n[a]\n  x = 1.5  # trailing\ny=2\nlist = 1, 2 3\n\n[b]\nname = hello world\n");
  CHECK(doc.has_section("a"));
  CHECK_FALSE(doc.has_section("c"));
  CHECK(doc.get_double("a", "x") == 1.5);
  CHECK(doc.get_int("a", "y") == 2);
  CHECK(doc.get_ints("a", "list") == std::vector<int>{1, 2, 3});
  CHECK(doc.get_string("b", "name") == "hello world");
  CHECK(doc.get_double("a", "missing", 4.0) == 4.0);
  CHECK(doc.entry("a", "y").line == 4);
}

TEST_CASE("INI errors carry line and key") {
  const ConfigError bad_line = config_error([] { (void)IniDocument::parse_string("[a]\nx = 1\nnot a pair\n"); });
  CHECK(bad_line.line() == 3);
  const ConfigError dup = config_error([] { (void)IniDocument::parse_string("[a]\nx = 1\nx = 2\n"); });
  CHECK(dup.line() == 3);
  CHECK(dup.key() == "a.x");
  const ConfigError orphan = config_error([] { (void)IniDocument::parse_string("x = 1\n"); });
  CHECK(orphan.line() == 1);
  const IniDocument doc = IniDocument::parse_string("[a]\nx = abc\ny = 2.5\n");
  const ConfigError num = config_error([&] { (void)doc.get_double("a", "x"); });
  CHECK(num.line() == 2);
  CHECK(num.key() == "a.x");
  CHECK_THROWS_AS((void)doc.get_int("a", "y"), ConfigError);
  const ConfigError missing = config_error([&] { (void)doc.get_double("a", "z"); });
  CHECK(missing.line() == 0);
  CHECK(missing.key() == "a.z");
  CHECK_THROWS_AS(IniDocument::load(config_path("does_not_exist.cfg")), ConfigError);
}

TEST_CASE("unknown sections and keys are rejected") {
  const ConfigError s = config_error([] { from_text(std::string(kMinimal) + "[extra]\nx = 1\n"); });
  CHECK(s.key() == "extra");
  const ConfigError k = config_error([] { from_text(std::string(kMinimal) + "[run]\nvolume = 3\n"); });
  CHECK(k.key() == "run.volume");
  CHECK(k.line() == 6);
}

TEST_CASE("minimal config gets documented defaults") {
  const ExperimentConfig c = from_text(kMinimal);
  CHECK(c.field().num_atoms() == 2);
  CHECK(c.lambda_axis == symmetric_axis(5.0, 201));
  CHECK(c.volumes == std::vector<int>{100, 200, 400});
  CHECK(c.mode == EvalMode::Exact);
  CHECK(c.tolerances.duality == 0.02);
  CHECK(c.upper_margin() == doctest::Approx(3.0 * 0.05 * 1.0));
  CHECK(c.lambda_axes().size() == 1);
}

TEST_CASE("every shipped config loads") {
  for (const auto& entry : std::filesystem::directory_iterator(LDLAB_CONFIG_DIR)) {
    if (entry.path().extension() != ".cfg") continue;
    CAPTURE(entry.path().string());
    const ExperimentConfig c = load_experiment(entry.path().string());
    CHECK(c.model.has_value());
    CHECK_FALSE(c.model_name.empty());
  }
}

TEST_CASE("model kinds built from config") {
  const ExperimentConfig mc = load_experiment(config_path("doeblin.cfg"));
  CHECK(mc.field().kind() == FieldModel::Kind::Markov);
  CHECK(mc.field().transition()[1][0] == 0.4);

  const ExperimentConfig geo = load_experiment(config_path("mosco_family.cfg"));
  const auto& w = geo.field().weights();
  REQUIRE(w.size() == 10);
  CHECK(w[1] / w[0] == doctest::Approx(0.5));
  CHECK(w[0] == doctest::Approx(0.5 / (1.0 - std::pow(0.5, 10))));
  CHECK(geo.mosco.max_index == 12);
  CHECK(geo.mosco.k_offset == 4);

  const ExperimentConfig cond = load_experiment(config_path("conditioned_block.cfg"));
  CHECK(cond.field().kind() == FieldModel::Kind::Conditioned);
  CHECK(cond.field().block_side() == 2);

  const ExperimentConfig plane = from_text("[model]\nkind = iid\natoms = 1 0; 0 1; -1 -1\nweights = 0.2, 0.3, 0.5\n"
                                           "[grids]\nx = 0 0; 0.1 0.2\n");
  CHECK(plane.field().value_dim() == 2);
  CHECK(plane.x_points.size() == 2);
  CHECK(plane.x_points[1] == Point{0.1, 0.2});
  CHECK(plane.lambda_axes().size() == 2);
}

TEST_CASE("model errors name the offending key") {
  CHECK(config_error([] { from_text("[model]\nkind = iid\nweights = uniform\n"); }).key() == "model.atoms");
  CHECK(config_error([] { from_text("[model]\nkind = iid\natoms = 0, 0\nweights = uniform\n"); }).key() == "model.atoms");
  CHECK(config_error([] { from_text("[model]\nkind = iid\natoms = 0, 1\nweights = 0.5\n"); }).key() == "model.weights");
  CHECK(config_error([] { from_text("[model]\nkind = weird\natoms = 0, 1\nweights = uniform\n"); }).key() == "model.kind");
  CHECK(config_error([] { from_text("[model]\nkind = markov\natoms = 0, 1\ntransition = 0.5 0.5\n"); }).key() ==
        "model.transition");
  CHECK(config_error([] {
          from_text("[model]\nkind = conditioned\nbase_kind = iid\natoms = 0, 1\nweights = uniform\nm = 2\nK = 0, 5\n");
        }).key() == "model.K");
}

TEST_CASE("run section validation") {
  CHECK(config_error([] { from_text(std::string(kMinimal) + "[run]\nvolumes = 20, 10\n"); }).key() == "run.volumes");
  CHECK(config_error([] { from_text(std::string(kMinimal) + "[run]\nepsilon = 1.5\n"); }).key() == "run.epsilon");
  CHECK(config_error([] { from_text(std::string(kMinimal) + "[run]\ndelta = 0\n"); }).key() == "run.delta");
  CHECK(config_error([] { from_text(std::string(kMinimal) + "[run]\nmode = fast\n"); }).key() == "run.mode");
  const ExperimentConfig mc = from_text(std::string(kMinimal) + "[run]\nmode = mc\nmc_samples = 500\nseed = 99\n");
  CHECK(mc.mode == EvalMode::MonteCarlo);
  CHECK(mc.mc_samples == 500);
  CHECK(mc.seed == 99);
}

TEST_CASE("integer tables") {
  const IntTable t = parse_int_table("1:0, 2:1, 4:3");
  CHECK(t.int_at(4) == 3);
  CHECK_FALSE(t.has(3));
  CHECK(parse_int_table("2.5").at(100) == 2.5);
  CHECK_THROWS_AS(parse_int_table("1.5:2"), ConfigError);
  CHECK_THROWS_AS(parse_int_table("1-2"), ConfigError);
}

TEST_CASE("decoupling and local-control tables override the model parameters") {
  const ExperimentConfig c = from_text(
      "[model]\nkind = iid\natoms = -1, 1\nweights = uniform\ng_table = 3\nc_table = 1:0.5, 2:0.25\n"
      "t_table = 0.5:3, 1:1.5\nalpha_table = 0.5:0.8, 1:0.9\n");
  const ModelParams& p = c.field().params();
  CHECK(p.decoupling.gap.int_at(10) == 3);
  CHECK(p.decoupling.cost.at(2) == 0.25);
  const LocalControlEntry wide = p.local_control(ConvexShape::interval(1.2).as_gauge());
  CHECK(wide.t == 1.5);
  CHECK(wide.alpha == 0.9);
  const LocalControlEntry mid = p.local_control(ConvexShape::interval(0.7).as_gauge());
  CHECK(mid.t == 3.0);
  CHECK(mid.alpha == 0.8);
  const LocalControlEntry none = p.local_control(ConvexShape::interval(0.1).as_gauge());
  CHECK(none.t == kInf);
  CHECK(none.alpha == 0.0);
  CHECK(config_error([] {
          from_text("[model]\nkind = iid\natoms = -1, 1\nweights = uniform\nt_table = 0.5:3\nalpha_table = 1:0.9\n");
        }).key() == "model.alpha_table");
}

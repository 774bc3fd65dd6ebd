#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "ldlab/harness.hpp"

namespace fs = std::filesystem;

namespace {

struct Options {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out = "ldlab_out";
  std::string mode;
  bool quiet = false;
  std::string input;
  double x_lo = 0.0;
  double x_hi = 0.0;
  int x_points = 0;
};

ldlab::ExperimentConfig load(const Options& o) {
  if (o.config.empty()) throw ldlab::ConfigError("--config is required for this command");
  ldlab::ExperimentConfig cfg = ldlab::load_experiment(o.config);
  if (o.seed) cfg.seed = *o.seed;
  if (!o.mode.empty()) cfg.mode = ldlab::parse_eval_mode(o.mode);
  return cfg;
}

void emit(const ldlab::RunResult& res, const Options& o) {
  fs::create_directories(o.out);
  for (const auto& a : res.artifacts) {
    std::ofstream f(fs::path(o.out) / a.name, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write " + (fs::path(o.out) / a.name).string());
    f << a.content;
  }
  if (!o.quiet)
    for (const auto& line : res.summary) std::cout << line << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ldlab: finite-volume large-deviation verification harness"};
  app.require_subcommand(1);
  Options o;

  using Runner = std::function<ldlab::RunResult(const Options&)>;
  const std::map<std::string, std::pair<std::string, Runner>> commands{
      {"tiling", {"partial tilings and the marginal-density table", [](const Options& x) { return ldlab::run_tiling(load(x)); }}},
      {"check-hypotheses",
       {"randomized decoupling and local-control tests", [](const Options& x) { return ldlab::run_check_hypotheses(load(x)); }}},
      {"pressure", {"finite-volume and limit pressure curves", [](const Options& x) { return ldlab::run_pressure(load(x)); }}},
      {"entropy", {"entropy estimates and the upper bound", [](const Options& x) { return ldlab::run_entropy(load(x)); }}},
      {"chebyshev", {"exponential Chebyshev bound on random events", [](const Options& x) { return ldlab::run_chebyshev(load(x)); }}},
      {"subadditive",
       {"tiling inequality and finite-volume concavity", [](const Options& x) { return ldlab::run_subadditive(load(x)); }}},
      {"mosco", {"truncation family and Mosco convergence checks", [](const Options& x) { return ldlab::run_mosco_pipeline(load(x)); }}},
      {"verify", {"full entropy = -conjugate pressure pipeline", [](const Options& x) { return ldlab::verify_duality(load(x)); }}},
      {"lft",
       {"grid Legendre-Fenchel transform of a curve CSV",
        [](const Options& x) {
          std::ifstream in(x.input);
          if (!in) throw ldlab::ConfigError("cannot open input curve '" + x.input + "'", 0, "--input");
          if (x.x_points < 1) return ldlab::run_lft(in);
          if (!(x.x_hi >= x.x_lo)) throw ldlab::ConfigError("--x-hi must not be below --x-lo", 0, "--x-hi");
          return ldlab::run_lft(in, {ldlab::GridAxis{x.x_lo, x.x_hi, x.x_points}});
        }}},
  };

  std::map<CLI::App*, const Runner*> runners;
  for (const auto& [name, entry] : commands) {
    CLI::App* sub = app.add_subcommand(name, entry.first);
    if (name == "lft") {
      sub->add_option("--input", o.input, "GridFunction CSV")->required();
      sub->add_option("--x-lo", o.x_lo, "lower end of the x grid");
      sub->add_option("--x-hi", o.x_hi, "upper end of the x grid");
      sub->add_option("--x-points", o.x_points, "x grid points (default: the input grid)");
    } else {
      sub->add_option("--config", o.config, "config file")->required();
    }
    sub->add_option("--seed", o.seed, "override [run] seed");
    sub->add_option("--out", o.out, "output directory");
    sub->add_option("--mode", o.mode, "exact or mc")->check(CLI::IsMember({"exact", "mc"}));
    sub->add_flag("--quiet", o.quiet, "suppress the summary");
    runners[sub] = &entry.second;
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : ldlab::kConfigErrorExit;
  }

  try {
    for (const auto& [sub, runner] : runners)
      if (sub->parsed()) {
        const ldlab::RunResult res = (*runner)(o);
        emit(res, o);
        return ldlab::exit_code(res.status);
      }
  } catch (const ldlab::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return ldlab::kConfigErrorExit;
  } catch (const ldlab::BudgetExceeded& e) {
    std::cerr << "inconclusive: " << e.what() << '\n';
    return ldlab::exit_code(ldlab::Status::Inconclusive);
  } catch (const ldlab::ConvergenceError& e) {
    std::cerr << "inconclusive: " << e.what() << '\n';
    return ldlab::exit_code(ldlab::Status::Inconclusive);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return ldlab::kConfigErrorExit;
  }
  return ldlab::kConfigErrorExit;
}

#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "ldlab/field_model.hpp"
#include "ldlab/grid_function.hpp"
#include "ldlab/hypotheses.hpp"

namespace ldlab {

/// Malformed or incomplete configuration. `line` is 0 when the problem is
/// a missing entry.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& message, int line = 0, std::string key = {});
  [[nodiscard]] int line() const { return line_; }
  [[nodiscard]] const std::string& key() const { return key_; }

 private:
  int line_;
  std::string key_;
};

/// Flat INI document: `[section]` headers, `key = value` lines, comments
/// starting with '#' or ';'.
class IniDocument {
 public:
  struct Entry {
    std::string value;
    int line = 0;
  };

  static IniDocument parse(std::istream& is);
  static IniDocument parse_string(const std::string& text);
  static IniDocument load(const std::string& path);

  [[nodiscard]] bool has(const std::string& section, const std::string& key) const;
  [[nodiscard]] bool has_section(const std::string& section) const;
  /// Throws ConfigError naming section.key when missing.
  [[nodiscard]] const Entry& entry(const std::string& section, const std::string& key) const;

  [[nodiscard]] std::string get_string(const std::string& section, const std::string& key) const;
  [[nodiscard]] std::string get_string(const std::string& section, const std::string& key, const std::string& def) const;
  [[nodiscard]] double get_double(const std::string& section, const std::string& key) const;
  [[nodiscard]] double get_double(const std::string& section, const std::string& key, double def) const;
  [[nodiscard]] int get_int(const std::string& section, const std::string& key) const;
  [[nodiscard]] int get_int(const std::string& section, const std::string& key, int def) const;
  [[nodiscard]] std::vector<double> get_doubles(const std::string& section, const std::string& key) const;
  [[nodiscard]] std::vector<double> get_doubles(const std::string& section, const std::string& key,
                                                const std::vector<double>& def) const;
  [[nodiscard]] std::vector<int> get_ints(const std::string& section, const std::string& key) const;
  [[nodiscard]] std::vector<int> get_ints(const std::string& section, const std::string& key,
                                          const std::vector<int>& def) const;

  /// Rejects sections and keys outside the given schema.
  void require_known(const std::map<std::string, std::set<std::string>>& schema) const;

 private:
  std::map<std::string, std::map<std::string, Entry>> sections_;
};

struct ToleranceConfig {
  double duality = 0.02;
  /// Negative selects 3 * (lambda step) * (largest atom l1-norm).
  double upper_margin = -1.0;
  double exact = 1e-12;
  double inequality = 1e-9;
  double block_identity = 1e-10;
  double mosco_m2 = 1e-6;
  double mosco_m1 = 1e-4;
};

struct MoscoConfig {
  int max_index = 12;
  int k_offset = 4;
  int window = 5;
  double radius = -1.0;
  std::size_t identity_budget = 1 << 16;
};

struct TilingConfig {
  int n = 10;
  int m = 2;
  int gap = 1;
  int step = 1;
  int dim = 1;
  std::vector<int> m_sequence{2, 4, 8, 16, 32};
  std::string n_of_m = "square";
  IntTable rho_gap = IntTable::constant(0);
  std::vector<double> thresholds{0.5, 0.2};
};

struct EventsConfig {
  int count = 200;
  int box_side = 4;
  int max_far_sites = 4;
  double radius = 1.0;
  int chebyshev_cases = 100;
  int chebyshev_max_n = 200;
  std::vector<int> sub_m{2, 4, 8};
  std::vector<int> sub_n{32, 64, 128};
  std::vector<double> sub_center{0.0};
  double sub_radius = 0.5;
};

/// Everything one experiment needs; built from an IniDocument.
struct ExperimentConfig {
  std::optional<FieldModel> model;
  std::string model_name;
  GridAxis lambda_axis = symmetric_axis(5.0, 201);
  std::vector<Point> x_points{Point{0.0}};
  GridAxis x_axis{-1.0, 1.0, 101};
  std::vector<int> volumes{100, 200, 400};
  std::vector<double> radii{0.2, 0.1, 0.05, 0.025};
  double epsilon = 0.1;
  double delta = 0.01;
  std::uint64_t seed = 1;
  EvalMode mode = EvalMode::Exact;
  int mc_samples = 20000;
  ToleranceConfig tolerances;
  MoscoConfig mosco;
  TilingConfig tiling;
  EventsConfig events;

  [[nodiscard]] const FieldModel& field() const;
  /// Lambda grid axes, one per value dimension.
  [[nodiscard]] std::vector<GridAxis> lambda_axes() const;
  [[nodiscard]] std::vector<GridAxis> x_axes() const;
  /// Resolved upper-bound margin.
  [[nodiscard]] double upper_margin() const;
};

/// Builds the model described by the [model] section.
FieldModel model_from_config(const IniDocument& doc);
ExperimentConfig experiment_from_config(const IniDocument& doc);
ExperimentConfig load_experiment(const std::string& path);

/// "1:0, 2:1" or a single constant; keys are integers.
IntTable parse_int_table(const std::string& text, int line = 0, const std::string& key = {});

}  // namespace ldlab

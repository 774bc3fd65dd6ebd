#include "ldlab/config.hpp"

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "ldlab/numeric.hpp"

namespace ldlab {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::string qualified(const std::string& section, const std::string& key) { return section + "." + key; }

std::string at_line(int line) { return line > 0 ? " (line " + std::to_string(line) + ")" : std::string{}; }

double parse_double_token(const std::string& token, int line, const std::string& key) {
  const std::string t = trim(token);
  if (t.empty()) throw ConfigError("empty number in '" + key + "'" + at_line(line), line, key);
  errno = 0;
  char* end = nullptr;
  const double v = std::strtod(t.c_str(), &end);
  if (end != t.c_str() + t.size() || errno == ERANGE || std::isnan(v))
    throw ConfigError("'" + key + "': cannot parse '" + t + "' as a number" + at_line(line), line, key);
  return v;
}

int parse_int_token(const std::string& token, int line, const std::string& key) {
  const std::string t = trim(token);
  errno = 0;
  char* end = nullptr;
  const long v = std::strtol(t.c_str(), &end, 10);
  if (t.empty() || end != t.c_str() + t.size() || errno == ERANGE || v < -1000000000L || v > 1000000000L)
    throw ConfigError("'" + key + "': cannot parse '" + t + "' as an integer" + at_line(line), line, key);
  return static_cast<int>(v);
}

/// Splits on commas and whitespace, dropping empty pieces.
std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : s) {
    if (ch == ',' || ch == ' ' || ch == '\t') {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(ch);
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

std::vector<std::string> split_on(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : s) {
    if (ch == sep) {
      out.push_back(trim(cur));
      cur.clear();
    } else {
      cur.push_back(ch);
    }
  }
  out.push_back(trim(cur));
  return out;
}

std::vector<std::pair<double, double>> parse_pairs(const std::string& text, int line, const std::string& key) {
  std::vector<std::pair<double, double>> out;
  for (const auto& piece : split_on(text, ',')) {
    const auto kv = split_on(piece, ':');
    if (kv.size() != 2)
      throw ConfigError("'" + key + "': expected entries of the form key:value, got '" + piece + "'" + at_line(line),
                        line, key);
    out.emplace_back(parse_double_token(kv[0], line, key), parse_double_token(kv[1], line, key));
  }
  return out;
}

/// Atoms: scalars separated by commas, or points separated by ';' whose
/// coordinates are separated by commas or whitespace.
ValueSpace parse_atoms(const IniDocument::Entry& e, const std::string& key) {
  ValueSpace vs;
  if (e.value.find(';') == std::string::npos) {
    vs.dim = 1;
    for (const auto& tok : split_list(e.value)) vs.atoms.push_back({parse_double_token(tok, e.line, key)});
  } else {
    for (const auto& piece : split_on(e.value, ';')) {
      if (piece.empty()) continue;
      Point p;
      for (const auto& tok : split_list(piece)) p.push_back(parse_double_token(tok, e.line, key));
      vs.atoms.push_back(std::move(p));
    }
    vs.dim = vs.atoms.empty() ? 0 : static_cast<int>(vs.atoms.front().size());
  }
  if (vs.atoms.empty()) throw ConfigError("'" + key + "': no atoms given" + at_line(e.line), e.line, key);
  for (const auto& a : vs.atoms)
    if (static_cast<int>(a.size()) != vs.dim || vs.dim < 1 || vs.dim > 2)
      throw ConfigError("'" + key + "': every atom needs the same dimension, 1 or 2" + at_line(e.line), e.line, key);
  try {
    vs.validate(true);
  } catch (const std::invalid_argument& ex) {
    throw ConfigError("'" + key + "': " + ex.what() + at_line(e.line), e.line, key);
  }
  return vs;
}

/// Explicit list, "uniform", or "geometric q" (weights proportional to q^i).
std::vector<double> parse_weights(const IniDocument::Entry& e, const std::string& key, std::size_t count) {
  const std::string v = trim(e.value);
  std::vector<double> w;
  if (v == "uniform") {
    w.assign(count, 1.0 / static_cast<double>(count));
    return w;
  }
  if (v.rfind("geometric", 0) == 0) {
    const double q = parse_double_token(v.substr(9), e.line, key);
    if (!(q > 0.0)) throw ConfigError("'" + key + "': geometric ratio must be positive" + at_line(e.line), e.line, key);
    double total = 0.0;
    for (std::size_t i = 0; i < count; ++i) {
      w.push_back(std::pow(q, static_cast<double>(i)));
      total += w.back();
    }
    for (double& x : w) x /= total;
    return w;
  }
  for (const auto& tok : split_list(v)) w.push_back(parse_double_token(tok, e.line, key));
  if (w.size() != count)
    throw ConfigError("'" + key + "': " + std::to_string(w.size()) + " weights for " + std::to_string(count) + " atoms" +
                          at_line(e.line),
                      e.line, key);
  return w;
}

Matrix parse_matrix(const IniDocument::Entry& e, const std::string& key, std::size_t k) {
  Matrix m;
  for (const auto& row : split_on(e.value, ';')) {
    if (row.empty()) continue;
    std::vector<double> r;
    for (const auto& tok : split_list(row)) r.push_back(parse_double_token(tok, e.line, key));
    if (r.size() != k)
      throw ConfigError("'" + key + "': every row needs " + std::to_string(k) + " entries" + at_line(e.line), e.line, key);
    m.push_back(std::move(r));
  }
  if (m.size() != k)
    throw ConfigError("'" + key + "': expected " + std::to_string(k) + " rows separated by ';'" + at_line(e.line), e.line,
                      key);
  return m;
}

/// (t, alpha) claimed on cubes (-r, r)^k; V is served by the entry of the
/// largest tabulated r whose cube lies inside V.
LocalControlRule table_local_control(std::vector<std::pair<double, LocalControlEntry>> table, int dim) {
  std::sort(table.begin(), table.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  return [table = std::move(table), dim](const GaugeFn& gauge) {
    double worst = 0.0;
    for (int mask = 0; mask < (1 << dim); ++mask) {
      Point c(static_cast<std::size_t>(dim));
      for (int j = 0; j < dim; ++j) c[static_cast<std::size_t>(j)] = (mask >> j) & 1 ? 1.0 : -1.0;
      worst = std::max(worst, gauge(c));
    }
    const double inscribed = worst > 0.0 ? 1.0 / worst : kInf;
    LocalControlEntry best{kInf, 0.0};
    for (const auto& [r, entry] : table)
      if (r <= inscribed * (1.0 + 1e-12)) best = entry;
    return best;
  };
}

const std::map<std::string, std::set<std::string>>& schema() {
  static const std::map<std::string, std::set<std::string>> s{
      {"model",
       {"name", "kind", "base_kind", "lattice_dim", "atoms", "weights", "transition", "m", "K", "g_table",
        "c_table", "local_control", "doeblin_t", "t_table", "alpha_table"}},
      {"grids", {"lambda_half_width", "lambda_points", "x", "x_lo", "x_hi", "x_grid_points"}},
      {"run", {"volumes", "radii", "epsilon", "delta", "seed", "mode", "mc_samples"}},
      {"tolerances", {"duality", "upper_margin", "exact", "inequality", "block_identity", "mosco_m2", "mosco_m1"}},
      {"mosco", {"M", "K_offset", "window", "radius", "identity_budget"}},
      {"tiling", {"n", "m", "gap", "step", "dim", "m_sequence", "n_of_m", "rho_gap", "thresholds"}},
      {"events",
       {"count", "box_side", "max_far_sites", "radius", "chebyshev_cases", "chebyshev_max_n", "sub_m", "sub_n",
        "sub_center", "sub_radius"}},
  };
  return s;
}

void require_positive(int v, const IniDocument& doc, const std::string& section, const std::string& key) {
  if (v < 1) {
    const int line = doc.has(section, key) ? doc.entry(section, key).line : 0;
    throw ConfigError("'" + qualified(section, key) + "' must be positive" + at_line(line), line, qualified(section, key));
  }
}

}  // namespace

ConfigError::ConfigError(const std::string& message, int line, std::string key)
    : std::runtime_error(message), line_(line), key_(std::move(key)) {}

IniDocument IniDocument::parse(std::istream& is) {
  IniDocument doc;
  std::string raw;
  std::string section;
  int line = 0;
  while (std::getline(is, raw)) {
    ++line;
    std::string s = trim(raw);
    if (s.empty() || s[0] == '#' || s[0] == ';') continue;
    if (s[0] == '[') {
      if (s.back() != ']' || s.size() < 3) throw ConfigError("malformed section header '" + s + "'" + at_line(line), line);
      section = trim(s.substr(1, s.size() - 2));
      doc.sections_[section];
      continue;
    }
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw ConfigError("expected 'key = value', got '" + s + "'" + at_line(line), line);
    const std::string key = trim(s.substr(0, eq));
    std::string value = trim(s.substr(eq + 1));
    const auto hash = value.find(" #");
    if (hash != std::string::npos) value = trim(value.substr(0, hash));
    if (key.empty()) throw ConfigError("empty key" + at_line(line), line);
    if (section.empty()) throw ConfigError("key '" + key + "' outside any section" + at_line(line), line, key);
    auto& sec = doc.sections_[section];
    if (sec.count(key))
      throw ConfigError("duplicate key '" + qualified(section, key) + "'" + at_line(line), line, qualified(section, key));
    sec[key] = Entry{value, line};
  }
  return doc;
}

IniDocument IniDocument::parse_string(const std::string& text) {
  std::istringstream is(text);
  return parse(is);
}

IniDocument IniDocument::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  return parse(in);
}

bool IniDocument::has(const std::string& section, const std::string& key) const {
  const auto it = sections_.find(section);
  return it != sections_.end() && it->second.count(key) > 0;
}

bool IniDocument::has_section(const std::string& section) const { return sections_.count(section) > 0; }

const IniDocument::Entry& IniDocument::entry(const std::string& section, const std::string& key) const {
  const auto it = sections_.find(section);
  if (it == sections_.end() || !it->second.count(key))
    throw ConfigError("missing required key '" + qualified(section, key) + "'", 0, qualified(section, key));
  return it->second.at(key);
}

std::string IniDocument::get_string(const std::string& section, const std::string& key) const {
  return entry(section, key).value;
}

std::string IniDocument::get_string(const std::string& section, const std::string& key, const std::string& def) const {
  return has(section, key) ? entry(section, key).value : def;
}

double IniDocument::get_double(const std::string& section, const std::string& key) const {
  const Entry& e = entry(section, key);
  return parse_double_token(e.value, e.line, qualified(section, key));
}

double IniDocument::get_double(const std::string& section, const std::string& key, double def) const {
  return has(section, key) ? get_double(section, key) : def;
}

int IniDocument::get_int(const std::string& section, const std::string& key) const {
  const Entry& e = entry(section, key);
  return parse_int_token(e.value, e.line, qualified(section, key));
}

int IniDocument::get_int(const std::string& section, const std::string& key, int def) const {
  return has(section, key) ? get_int(section, key) : def;
}

std::vector<double> IniDocument::get_doubles(const std::string& section, const std::string& key) const {
  const Entry& e = entry(section, key);
  std::vector<double> out;
  for (const auto& tok : split_list(e.value)) out.push_back(parse_double_token(tok, e.line, qualified(section, key)));
  if (out.empty()) throw ConfigError("'" + qualified(section, key) + "' is empty" + at_line(e.line), e.line, qualified(section, key));
  return out;
}

std::vector<double> IniDocument::get_doubles(const std::string& section, const std::string& key,
                                             const std::vector<double>& def) const {
  return has(section, key) ? get_doubles(section, key) : def;
}

std::vector<int> IniDocument::get_ints(const std::string& section, const std::string& key) const {
  const Entry& e = entry(section, key);
  std::vector<int> out;
  for (const auto& tok : split_list(e.value)) out.push_back(parse_int_token(tok, e.line, qualified(section, key)));
  if (out.empty()) throw ConfigError("'" + qualified(section, key) + "' is empty" + at_line(e.line), e.line, qualified(section, key));
  return out;
}

std::vector<int> IniDocument::get_ints(const std::string& section, const std::string& key,
                                       const std::vector<int>& def) const {
  return has(section, key) ? get_ints(section, key) : def;
}

void IniDocument::require_known(const std::map<std::string, std::set<std::string>>& known) const {
  for (const auto& [section, entries] : sections_) {
    const auto it = known.find(section);
    if (it == known.end()) {
      const int line = entries.empty() ? 0 : entries.begin()->second.line;
      throw ConfigError("unknown section [" + section + "]" + at_line(line), line, section);
    }
    for (const auto& [key, e] : entries)
      if (!it->second.count(key))
        throw ConfigError("unknown key '" + qualified(section, key) + "'" + at_line(e.line), e.line,
                          qualified(section, key));
  }
}

IntTable parse_int_table(const std::string& text, int line, const std::string& key) {
  if (text.find(':') == std::string::npos) return IntTable::constant(parse_double_token(text, line, key));
  std::vector<std::pair<int, double>> entries;
  for (const auto& [k, v] : parse_pairs(text, line, key)) {
    if (k != std::floor(k)) throw ConfigError("'" + key + "': table keys must be integers" + at_line(line), line, key);
    entries.emplace_back(static_cast<int>(k), v);
  }
  return IntTable(std::move(entries));
}

FieldModel model_from_config(const IniDocument& doc) {
  const std::string kind = doc.get_string("model", "kind");
  const bool block = kind == "product" || kind == "conditioned";
  if (kind != "iid" && kind != "markov" && !block) {
    const int line = doc.entry("model", "kind").line;
    throw ConfigError("model.kind must be iid, markov, product or conditioned, got '" + kind + "'" + at_line(line), line,
                      "model.kind");
  }
  const std::string base_kind = block ? doc.get_string("model", "base_kind") : kind;
  if (base_kind != "iid" && base_kind != "markov") {
    const int line = doc.entry("model", "base_kind").line;
    throw ConfigError("model.base_kind must be iid or markov" + at_line(line), line, "model.base_kind");
  }

  const auto& atoms_entry = doc.entry("model", "atoms");
  ValueSpace values = parse_atoms(atoms_entry, "model.atoms");
  const int lattice_dim = doc.get_int("model", "lattice_dim", 1);
  if (lattice_dim != 1 && lattice_dim != 2) {
    const int line = doc.entry("model", "lattice_dim").line;
    throw ConfigError("model.lattice_dim must be 1 or 2" + at_line(line), line, "model.lattice_dim");
  }

  auto wrap = [&](const std::string& key, auto&& build) {
    try {
      return build();
    } catch (const ConfigError&) {
      throw;
    } catch (const std::exception& ex) {
      const int line = doc.has("model", key) ? doc.entry("model", key).line : 0;
      throw ConfigError(std::string("model.") + key + ": " + ex.what() + at_line(line), line, "model." + key);
    }
  };

  const std::size_t k = values.atoms.size();
  FieldModel base = [&] {
    if (base_kind == "iid") {
      std::vector<double> w = parse_weights(doc.entry("model", "weights"), "model.weights", k);
      return wrap("weights", [&] { return FieldModel::iid(values, w, lattice_dim); });
    }
    if (lattice_dim != 1) throw ConfigError("model.lattice_dim: Markov chains live on Z (lattice_dim = 1)", 0, "model.lattice_dim");
    Matrix p = parse_matrix(doc.entry("model", "transition"), "model.transition", k);
    return wrap("transition", [&] { return FieldModel::markov(values, p); });
  }();

  ModelParams params = base.params();
  if (doc.has("model", "g_table")) {
    const auto& e = doc.entry("model", "g_table");
    params.decoupling.gap = parse_int_table(e.value, e.line, "model.g_table");
  }
  if (doc.has("model", "c_table")) {
    const auto& e = doc.entry("model", "c_table");
    params.decoupling.cost = parse_int_table(e.value, e.line, "model.c_table");
  }

  const std::string lc = doc.get_string("model", "local_control", doc.has("model", "t_table") ? "table" : "sure");
  if (lc == "sure") {
    params.local_control = sure_event_local_control(values);
  } else if (lc == "doeblin") {
    if (base_kind != "markov")
      throw ConfigError("model.local_control = doeblin needs a Markov base", doc.entry("model", "local_control").line,
                        "model.local_control");
    const double t = doc.get_double("model", "doeblin_t");
    params.local_control = doeblin_local_control(base, t);
  } else if (lc == "table") {
    const auto& te = doc.entry("model", "t_table");
    const auto& ae = doc.entry("model", "alpha_table");
    const auto ts = parse_pairs(te.value, te.line, "model.t_table");
    const auto as = parse_pairs(ae.value, ae.line, "model.alpha_table");
    std::vector<std::pair<double, LocalControlEntry>> table;
    for (const auto& [r, t] : ts) {
      const auto it = std::find_if(as.begin(), as.end(), [r = r](const auto& p) { return p.first == r; });
      if (it == as.end())
        throw ConfigError("model.alpha_table has no entry for radius " + format_double(r) + at_line(ae.line), ae.line,
                          "model.alpha_table");
      if (!(r > 0.0) || !(t > 0.0) || !(it->second >= 0.0 && it->second <= 1.0))
        throw ConfigError("model.t_table/alpha_table: need r > 0, t > 0 and alpha in [0, 1]" + at_line(te.line), te.line,
                          "model.t_table");
      table.emplace_back(r, LocalControlEntry{t, it->second});
    }
    params.local_control = table_local_control(std::move(table), values.dim);
  } else {
    const int line = doc.entry("model", "local_control").line;
    throw ConfigError("model.local_control must be sure, doeblin or table" + at_line(line), line, "model.local_control");
  }
  base.set_params(params);

  if (!block) return base;

  const int m = doc.get_int("model", "m");
  require_positive(m, doc, "model", "m");
  FieldModel out = [&] {
    if (kind == "product") return wrap("m", [&] { return product_of_marginals(base, m); });
    const auto& ke = doc.entry("model", "K");
    std::vector<int> allowed;
    for (const auto& tok : split_list(ke.value)) {
      const int a = parse_int_token(tok, ke.line, "model.K");
      if (a < 0 || a >= static_cast<int>(k))
        throw ConfigError("model.K: atom index " + std::to_string(a) + " out of range" + at_line(ke.line), ke.line, "model.K");
      allowed.push_back(a);
    }
    return wrap("K", [&] { return conditioned(base, m, allowed); });
  }();
  return out;
}

ExperimentConfig experiment_from_config(const IniDocument& doc) {
  doc.require_known(schema());
  ExperimentConfig cfg;
  cfg.model.emplace(model_from_config(doc));
  cfg.model_name = doc.get_string("model", "name", cfg.model->describe());
  const int k = cfg.model->value_dim();

  const double half = doc.get_double("grids", "lambda_half_width", 5.0);
  const int pts = doc.get_int("grids", "lambda_points", 201);
  require_positive(pts, doc, "grids", "lambda_points");
  if (!(half > 0.0)) throw ConfigError("grids.lambda_half_width must be positive", doc.entry("grids", "lambda_half_width").line, "grids.lambda_half_width");
  cfg.lambda_axis = symmetric_axis(half, pts);

  double lo = kInf, hi = -kInf;
  for (const auto& a : cfg.model->values().atoms)
    for (double v : a) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  cfg.x_axis = GridAxis{doc.get_double("grids", "x_lo", lo), doc.get_double("grids", "x_hi", hi),
                        doc.get_int("grids", "x_grid_points", 101)};
  require_positive(cfg.x_axis.points, doc, "grids", "x_grid_points");

  if (doc.has("grids", "x")) {
    const auto& e = doc.entry("grids", "x");
    cfg.x_points.clear();
    for (const auto& piece : split_on(e.value, ';')) {
      if (piece.empty()) continue;
      if (k == 1) {
        for (const auto& tok : split_list(piece)) cfg.x_points.push_back({parse_double_token(tok, e.line, "grids.x")});
      } else {
        Point p;
        for (const auto& tok : split_list(piece)) p.push_back(parse_double_token(tok, e.line, "grids.x"));
        if (static_cast<int>(p.size()) != k)
          throw ConfigError("grids.x: points need " + std::to_string(k) + " coordinates separated from each other by ';'" +
                                at_line(e.line),
                            e.line, "grids.x");
        cfg.x_points.push_back(std::move(p));
      }
    }
  } else {
    cfg.x_points = {Point(static_cast<std::size_t>(k), 0.0)};
  }

  cfg.volumes = doc.get_ints("run", "volumes", cfg.volumes);
  for (std::size_t i = 0; i < cfg.volumes.size(); ++i)
    if (cfg.volumes[i] < 1 || (i > 0 && cfg.volumes[i] <= cfg.volumes[i - 1])) {
      const int line = doc.entry("run", "volumes").line;
      throw ConfigError("run.volumes must be positive and increasing" + at_line(line), line, "run.volumes");
    }
  cfg.radii = doc.get_doubles("run", "radii", cfg.radii);
  for (double r : cfg.radii)
    if (!(r > 0.0)) throw ConfigError("run.radii must be positive", doc.entry("run", "radii").line, "run.radii");
  cfg.epsilon = doc.get_double("run", "epsilon", cfg.epsilon);
  cfg.delta = doc.get_double("run", "delta", cfg.delta);
  if (!(cfg.epsilon > 0.0 && cfg.epsilon < 1.0)) {
    const int line = doc.entry("run", "epsilon").line;
    throw ConfigError("run.epsilon must lie in (0, 1)" + at_line(line), line, "run.epsilon");
  }
  if (!(cfg.delta > 0.0)) {
    const int line = doc.entry("run", "delta").line;
    throw ConfigError("run.delta must be positive" + at_line(line), line, "run.delta");
  }
  cfg.seed = static_cast<std::uint64_t>(doc.get_int("run", "seed", 1));
  if (doc.has("run", "mode")) {
    const auto& e = doc.entry("run", "mode");
    try {
      cfg.mode = parse_eval_mode(e.value);
    } catch (const std::exception&) {
      throw ConfigError("run.mode must be exact or mc" + at_line(e.line), e.line, "run.mode");
    }
  }
  cfg.mc_samples = doc.get_int("run", "mc_samples", cfg.mc_samples);
  require_positive(cfg.mc_samples, doc, "run", "mc_samples");

  auto& t = cfg.tolerances;
  t.duality = doc.get_double("tolerances", "duality", t.duality);
  t.upper_margin = doc.get_double("tolerances", "upper_margin", t.upper_margin);
  t.exact = doc.get_double("tolerances", "exact", t.exact);
  t.inequality = doc.get_double("tolerances", "inequality", t.inequality);
  t.block_identity = doc.get_double("tolerances", "block_identity", t.block_identity);
  t.mosco_m2 = doc.get_double("tolerances", "mosco_m2", t.mosco_m2);
  t.mosco_m1 = doc.get_double("tolerances", "mosco_m1", t.mosco_m1);

  auto& mo = cfg.mosco;
  mo.max_index = doc.get_int("mosco", "M", mo.max_index);
  require_positive(mo.max_index, doc, "mosco", "M");
  mo.k_offset = doc.get_int("mosco", "K_offset", mo.k_offset);
  mo.window = doc.get_int("mosco", "window", mo.window);
  mo.radius = doc.get_double("mosco", "radius", mo.radius);
  mo.identity_budget = static_cast<std::size_t>(doc.get_int("mosco", "identity_budget", static_cast<int>(mo.identity_budget)));

  auto& ti = cfg.tiling;
  ti.n = doc.get_int("tiling", "n", ti.n);
  ti.m = doc.get_int("tiling", "m", ti.m);
  ti.gap = doc.get_int("tiling", "gap", ti.gap);
  ti.step = doc.get_int("tiling", "step", ti.step);
  ti.dim = doc.get_int("tiling", "dim", ti.dim);
  ti.m_sequence = doc.get_ints("tiling", "m_sequence", ti.m_sequence);
  ti.n_of_m = doc.get_string("tiling", "n_of_m", ti.n_of_m);
  if (ti.n_of_m != "square" && ti.n_of_m.rfind("linear:", 0) != 0) {
    const int line = doc.entry("tiling", "n_of_m").line;
    throw ConfigError("tiling.n_of_m must be 'square' or 'linear:<factor>'" + at_line(line), line, "tiling.n_of_m");
  }
  if (doc.has("tiling", "rho_gap")) {
    const auto& e = doc.entry("tiling", "rho_gap");
    ti.rho_gap = parse_int_table(e.value, e.line, "tiling.rho_gap");
  }
  ti.thresholds = doc.get_doubles("tiling", "thresholds", ti.thresholds);

  auto& ev = cfg.events;
  ev.count = doc.get_int("events", "count", ev.count);
  ev.box_side = doc.get_int("events", "box_side", ev.box_side);
  ev.max_far_sites = doc.get_int("events", "max_far_sites", ev.max_far_sites);
  ev.radius = doc.get_double("events", "radius", ev.radius);
  ev.chebyshev_cases = doc.get_int("events", "chebyshev_cases", ev.chebyshev_cases);
  ev.chebyshev_max_n = doc.get_int("events", "chebyshev_max_n", ev.chebyshev_max_n);
  ev.sub_m = doc.get_ints("events", "sub_m", ev.sub_m);
  ev.sub_n = doc.get_ints("events", "sub_n", ev.sub_n);
  ev.sub_center = doc.get_doubles("events", "sub_center", Point(static_cast<std::size_t>(k), 0.0));
  if (static_cast<int>(ev.sub_center.size()) != k)
    throw ConfigError("events.sub_center needs one coordinate per value dimension", doc.entry("events", "sub_center").line,
                      "events.sub_center");
  ev.sub_radius = doc.get_double("events", "sub_radius", ev.sub_radius);
  require_positive(ev.count, doc, "events", "count");
  require_positive(ev.box_side, doc, "events", "box_side");
  return cfg;
}

ExperimentConfig load_experiment(const std::string& path) { return experiment_from_config(IniDocument::load(path)); }

const FieldModel& ExperimentConfig::field() const {
  if (!model) throw ConfigError("no model configured");
  return *model;
}

std::vector<GridAxis> ExperimentConfig::lambda_axes() const {
  return std::vector<GridAxis>(static_cast<std::size_t>(field().value_dim()), lambda_axis);
}

std::vector<GridAxis> ExperimentConfig::x_axes() const {
  return std::vector<GridAxis>(static_cast<std::size_t>(field().value_dim()), x_axis);
}

double ExperimentConfig::upper_margin() const {
  if (tolerances.upper_margin >= 0.0) return tolerances.upper_margin;
  double slope = 0.0;
  for (const auto& a : field().values().atoms) {
    double l1 = 0.0;
    for (double v : a) l1 += std::abs(v);
    slope = std::max(slope, l1);
  }
  return 3.0 * lambda_axis.step() * slope;
}

}  // namespace ldlab

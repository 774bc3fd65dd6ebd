#include "ldlab/harness.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "json.hpp"
#include "ldlab/lattice_tiling.hpp"
#include "ldlab/numeric.hpp"

namespace ldlab {

namespace {

using Json = nlohmann::ordered_json;

Json num(double v) {
  if (std::isfinite(v)) return v;
  return format_double(v);
}

std::string point_label(const Point& p) {
  std::ostringstream os;
  for (std::size_t i = 0; i < p.size(); ++i) os << (i ? "," : "") << format_double(p[i]);
  return os.str();
}

Json tolerances_json(const ExperimentConfig& cfg) {
  Json t;
  t["duality"] = num(cfg.tolerances.duality);
  t["upper_margin"] = num(cfg.upper_margin());
  t["exact"] = num(cfg.tolerances.exact);
  t["inequality"] = num(cfg.tolerances.inequality);
  t["block_identity"] = num(cfg.tolerances.block_identity);
  t["mosco_m2"] = num(cfg.tolerances.mosco_m2);
  t["mosco_m1"] = num(cfg.tolerances.mosco_m1);
  return t;
}

/// Sorts reports, combines their statuses and appends the JSON report.
void finish(RunResult& res, const Json& header) {
  std::stable_sort(res.reports.begin(), res.reports.end(),
                   [](const VerificationReport& a, const VerificationReport& b) { return a.id < b.id; });
  Status st = Status::Pass;
  for (const auto& r : res.reports) st = combine(st, r.status);
  res.status = combine(res.status, st);
  if (res.reports.empty() && res.documents.empty()) res.status = Status::Inconclusive;

  Json j;
  j["schema_version"] = kReportSchemaVersion;
  j["command"] = res.command;
  for (const auto& [k, v] : header.items()) j[k] = v;
  j["status"] = to_string(res.status);
  Json reps = Json::array();
  for (const auto& r : res.reports) reps.push_back(Json::parse(r.to_json()));
  j["reports"] = reps;
  for (const auto& [key, doc] : res.documents) j[key] = Json::parse(doc);
  res.artifacts.push_back({res.command + "_report.json", j.dump(2) + "\n"});

  for (const auto& r : res.reports) {
    std::ostringstream os;
    os << r.id << ": " << to_string(r.status) << " (" << r.event_count << " records, worst slack "
       << format_double(r.worst_slack) << ")";
    res.summary.push_back(os.str());
  }
  res.summary.push_back(res.command + ": " + to_string(res.status));
}

void finish(RunResult& res, const ExperimentConfig& cfg) {
  Json h;
  h["model"] = cfg.model_name;
  h["seed"] = cfg.seed;
  h["mode"] = to_string(cfg.mode);
  h["tolerances"] = tolerances_json(cfg);
  finish(res, h);
}

EventCheckOptions event_options(const ExperimentConfig& cfg, std::uint64_t stream) {
  EventCheckOptions o;
  o.events = cfg.events.count;
  o.seed = derive_seed(cfg.seed, stream);
  o.mode = cfg.mode;
  o.mc_samples = cfg.mc_samples;
  o.tolerance = cfg.tolerances.exact;
  o.max_far_sites = cfg.events.max_far_sites;
  return o;
}

ConvexShape cube(int k, double r) { return ConvexShape::box(std::vector<double>(static_cast<std::size_t>(k), r)); }

/// About `target` evenly spaced points of the lambda grid, always including
/// both ends and the centre when present.
std::vector<Point> coarse_lambdas(const std::vector<GridAxis>& axes, int target = 11) {
  std::vector<std::vector<double>> per_axis;
  for (const auto& a : axes) {
    std::vector<double> vals;
    const int stride = std::max(1, (a.points - 1) / std::max(1, target - 1));
    for (int i = 0; i < a.points; i += stride) vals.push_back(a.at(i));
    if ((a.points - 1) % stride != 0) vals.push_back(a.at(a.points - 1));
    per_axis.push_back(std::move(vals));
  }
  std::vector<Point> out;
  if (per_axis.size() == 1) {
    for (double v : per_axis[0]) out.push_back({v});
  } else {
    for (double u : per_axis[0])
      for (double v : per_axis[1]) out.push_back({u, v});
  }
  return out;
}

template <class F>
void write_to(RunResult& res, const std::string& name, F&& writer) {
  std::ostringstream os;
  writer(os);
  res.artifacts.push_back({name, os.str()});
}

/// Turns a budget or convergence failure into an inconclusive report.
VerificationReport inconclusive_report(const std::string& id, const std::string& model, const std::string& why) {
  VerificationReport rep;
  rep.id = id;
  rep.model = model;
  rep.notes.push_back(why);
  rep.finalize();
  return rep;
}

std::function<int(int)> n_of_m_rule(const std::string& rule) {
  if (rule == "square") return [](int m) { return m * m; };
  const double factor = std::stod(rule.substr(7));
  return [factor](int m) { return static_cast<int>(std::lround(factor * m)); };
}

}  // namespace

const Artifact* RunResult::artifact(const std::string& name) const {
  for (const auto& a : artifacts)
    if (a.name == name) return &a;
  return nullptr;
}

int exit_code(Status s) {
  switch (s) {
    case Status::Pass: return 0;
    case Status::Fail: return 1;
    case Status::Inconclusive: return 2;
  }
  return 2;
}

void write_duality_csv(std::ostream& os, const std::vector<DualityRow>& rows) {
  const std::size_t k = rows.empty() ? 1 : rows.front().x.size();
  os << (k == 1 ? "x" : "x_1,x_2") << ",s_est,minus_pstar,gap,tolerance,status\n";
  for (const auto& r : rows) {
    for (double c : r.x) os << format_double(c) << ',';
    os << format_double(r.s_est) << ',' << format_double(r.minus_pstar) << ',' << format_double(r.gap) << ','
       << format_double(r.tolerance) << ',' << to_string(r.status) << '\n';
  }
}

RunResult verify_duality(const ExperimentConfig& cfg) {
  const FieldModel& model = cfg.field();
  const int k = model.value_dim();
  RunResult res;
  res.command = "verify";

  const PressureCurve limit = pressure_curve_limit(model, cfg.lambda_axes());
  write_to(res, "pressure_limit.csv", [&](std::ostream& os) { limit.write_csv(os); });
  const Conjugate conj = lft(limit.values, cfg.x_axes());
  write_to(res, "conjugate.csv", [&](std::ostream& os) { conj.function.write_csv(os, "x"); });

  std::vector<EntropyEstimate> estimates;
  MeanLawCache laws(model);
  for (std::size_t xi = 0; xi < cfg.x_points.size(); ++xi)
    for (std::size_t ri = 0; ri < cfg.radii.size(); ++ri) {
      const ConvexShape v = cube(k, cfg.radii[ri]);
      if (cfg.mode == EvalMode::Exact)
        estimates.push_back(entropy_estimate(laws, cfg.x_points[xi], v, cfg.volumes));
      else
        estimates.push_back(entropy_estimate_mc(model, cfg.x_points[xi], v, cfg.volumes, cfg.mc_samples,
                                                derive_seed(cfg.seed, 1000 + xi * cfg.radii.size() + ri)));
    }
  write_to(res, "entropy.csv", [&](std::ostream& os) { write_entropy_csv(os, estimates); });

  const double margin = cfg.upper_margin();
  VerificationReport upper = upper_bound_check(estimates, limit.values, margin, cfg.model_name, cfg.tolerances.exact);
  upper.mode = to_string(cfg.mode);
  res.reports.push_back(upper);

  VerificationReport gap_rep;
  gap_rep.id = "duality_gap";
  gap_rep.model = cfg.model_name;
  gap_rep.mode = to_string(cfg.mode);
  gap_rep.tolerance = 0.0;
  gap_rep.metric("tolerance", cfg.tolerances.duality);
  gap_rep.metric("grid_margin", cfg.lambda_axis.step() * limit.values.max_finite_slope());
  gap_rep.metric("largest_volume", cfg.volumes.back());
  std::vector<DualityRow> rows;
  double worst_oscillation = 0.0;
  for (std::size_t xi = 0; xi < cfg.x_points.size(); ++xi) {
    const EntropyEstimate* best = nullptr;
    for (std::size_t ri = 0; ri < cfg.radii.size(); ++ri) {
      const EntropyEstimate& e = estimates[xi * cfg.radii.size() + ri];
      if (!best || e.s_est < best->s_est) best = &e;
    }
    worst_oscillation = std::max(worst_oscillation, best->tail_oscillation);
    DualityRow row;
    row.x = cfg.x_points[xi];
    row.s_est = best->s_est;
    row.minus_pstar = -conjugate_at(limit.values, row.x);
    row.tolerance = cfg.tolerances.duality;
    row.std_error = best->std_errors.back();
    row.gap = row.s_est - row.minus_pstar;
    CheckRecord rec;
    rec.label = "x=" + point_label(row.x);
    rec.lhs = row.tolerance;
    rec.rhs = std::abs(row.gap);
    rec.std_error = row.std_error;
    rec.slack = std::isfinite(row.gap) ? rec.lhs - rec.rhs : std::nan("");
    row.status = gap_rep.add(std::move(rec)).status;
    if (!std::isfinite(row.gap))
      gap_rep.notes.push_back("x=" + point_label(row.x) +
                              ": s_est is -inf; the grid conjugate cannot represent +inf, so the gap is inconclusive");
    rows.push_back(row);
  }
  gap_rep.metric("finite_volume_oscillation", worst_oscillation);
  gap_rep.finalize();
  res.reports.push_back(gap_rep);
  write_to(res, "duality.csv", [&](std::ostream& os) { write_duality_csv(os, rows); });

  finish(res, cfg);
  return res;
}

std::vector<int> truncation_atoms(const FieldModel& base, int m, int k_offset) {
  const int count = std::clamp(m + k_offset, 1, base.num_atoms());
  std::vector<int> atoms(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) atoms[static_cast<std::size_t>(i)] = i;
  return atoms;
}

std::vector<MassRow> truncation_masses(const FieldModel& base, int max_index, int k_offset) {
  std::vector<MassRow> rows;
  bool ok = true;
  for (int m = 1; m <= max_index; ++m) {
    MassRow r;
    r.m = m;
    const auto atoms = truncation_atoms(base, m, k_offset);
    r.allowed = static_cast<int>(atoms.size());
    r.block_side = m + base.params().decoupling.gap.int_at(m) + base.step();
    const BoxSpec box = make_box(r.block_side, base.lattice_dim());
    r.mass = std::exp(log_conditioning_mass(base, box, atoms));
    r.bound = 1.0 - 1.0 / (static_cast<double>(m) * static_cast<double>(box.cardinality()));
    ok = ok && r.mass >= r.bound;
    rows.push_back(r);
  }
  if (!ok) {
    std::ostringstream os;
    os << "mass condition nu(K_m) >= 1 - 1/(m |Λ(m+g+l)|) fails:";
    for (const auto& r : rows)
      if (r.mass < r.bound)
        os << " m=" << r.m << " mass=" << format_double(r.mass) << " < bound=" << format_double(r.bound) << ";";
    throw MassConditionError(os.str(), 0, "mosco.K_offset");
  }
  return rows;
}

RunResult run_mosco_pipeline(const ExperimentConfig& cfg) {
  const FieldModel& base = cfg.field();
  RunResult res;
  res.command = "mosco";
  const auto masses = truncation_masses(base, cfg.mosco.max_index, cfg.mosco.k_offset);
  write_to(res, "mosco_masses.csv", [&](std::ostream& os) {
    os << "m,allowed_atoms,block_side,mass,bound\n";
    for (const auto& r : masses)
      os << r.m << ',' << r.allowed << ',' << r.block_side << ',' << format_double(r.mass) << ','
         << format_double(r.bound) << '\n';
  });

  const auto axes = cfg.lambda_axes();
  std::vector<GridFunction> family;
  std::vector<int> indices;
  for (int m = 1; m <= cfg.mosco.max_index; ++m) {
    const auto atoms = truncation_atoms(base, m, cfg.mosco.k_offset);
    family.push_back(GridFunction::tabulate(
        axes, [&](std::span<const double> l) { return conditioned_block_pressure(base, m, atoms, l); }));
    indices.push_back(m);
  }
  const GridFunction limit = GridFunction::tabulate(axes, [&](std::span<const double> l) { return pressure_limit(base, l); });
  write_to(res, "mosco_family.csv", [&](std::ostream& os) {
    os << (axes.size() == 1 ? "lambda" : "lambda_1,lambda_2") << ",m,value\n";
    for (std::size_t f = 0; f <= family.size(); ++f) {
      const GridFunction& g = f < family.size() ? family[f] : limit;
      for (std::size_t i = 0; i < g.size(); ++i) {
        for (double c : g.point(i)) os << format_double(c) << ',';
        os << (f < family.size() ? std::to_string(indices[f]) : std::string("limit")) << ','
           << format_double(g.value(i)) << '\n';
      }
    }
  });

  MoscoOptions opts;
  opts.m2_tolerance = cfg.tolerances.mosco_m2;
  opts.m1_tolerance = cfg.tolerances.mosco_m1;
  opts.m2_window = cfg.mosco.window;
  opts.m1_radius = cfg.mosco.radius;
  const MoscoReport mr = mosco_report(family, indices, limit, cfg.x_axes(), opts);
  res.documents.emplace_back("mosco", mr.to_json());
  res.status = mr.status;
  res.summary.push_back("mosco properness: " + std::string(to_string(mr.properness_status)) +
                        ", M2: " + to_string(mr.m2_status) + " (worst margin " + format_double(mr.worst_m2_margin) +
                        "), M1: " + to_string(mr.m1_status) + " (worst slack " + format_double(mr.worst_m1_slack) + ")");

  const auto lambdas = coarse_lambdas(axes);
  VerificationReport routes;
  routes.id = "conditioned_pressure_route";
  routes.model = cfg.model_name;
  routes.tolerance = cfg.tolerances.block_identity;
  for (int m = 1; m <= cfg.mosco.max_index; ++m) {
    const auto atoms = truncation_atoms(base, m, cfg.mosco.k_offset);
    const double configs = std::pow(static_cast<double>(atoms.size()), std::pow(static_cast<double>(m), base.lattice_dim()));
    if (configs > static_cast<double>(cfg.mosco.identity_budget)) continue;
    const FieldModel cm = conditioned(base, m, atoms);
    VerificationReport id = block_pressure_identity_check(cm, lambdas, {2, 3}, cfg.tolerances.block_identity);
    id.metric("m", m);
    res.reports.push_back(std::move(id));
    for (const auto& l : lambdas) {
      CheckRecord r;
      r.label = "m=" + std::to_string(m) + " lambda=" + point_label(l);
      r.lhs = conditioned_block_pressure(base, m, atoms, l);
      r.rhs = pressure_limit(cm, l);
      r.slack = -std::abs(r.lhs - r.rhs);
      routes.add(std::move(r));
    }
  }
  routes.notes.push_back("factorised conditioned pressure against the enumerated conditioned block law");
  routes.finalize();
  if (!routes.records.empty()) res.reports.push_back(routes);

  Json h;
  h["model"] = cfg.model_name;
  h["seed"] = cfg.seed;
  h["mode"] = to_string(cfg.mode);
  h["tolerances"] = tolerances_json(cfg);
  h["max_index"] = cfg.mosco.max_index;
  h["k_offset"] = cfg.mosco.k_offset;
  finish(res, h);
  return res;
}

RunResult run_tiling(const ExperimentConfig& cfg) {
  const auto& tc = cfg.tiling;
  RunResult res;
  res.command = "tiling";
  const Tiling t = tile(tc.n, tc.m, tc.gap, tc.step, tc.dim);

  VerificationReport rep;
  rep.id = "tiling";
  rep.model = "n=" + std::to_string(tc.n) + " m=" + std::to_string(tc.m);
  rep.tolerance = 0.0;
  const auto total = t.outer.cardinality();
  CheckRecord part;
  part.label = "partition";
  part.lhs = static_cast<double>(t.covered_sites() + static_cast<std::int64_t>(t.margin.size()));
  part.rhs = static_cast<double>(total);
  part.slack = -std::abs(part.lhs - part.rhs);
  rep.add(part);
  int min_dist = std::numeric_limits<int>::max();
  for (std::size_t i = 0; i < t.sub_boxes.size(); ++i)
    for (std::size_t j = i + 1; j < t.sub_boxes.size(); ++j)
      min_dist = std::min(min_dist, box_distance(t.sub_boxes[i], t.sub_boxes[j]));
  if (t.sub_boxes.size() > 1) {
    CheckRecord gap;
    gap.label = "gap";
    gap.lhs = min_dist;
    gap.rhs = tc.gap + 1;
    gap.slack = gap.lhs - gap.rhs;
    rep.add(gap);
  }
  CheckRecord det;
  det.label = "determinism";
  det.lhs = tile(tc.n, tc.m, tc.gap, tc.step, tc.dim) == t ? 1.0 : 0.0;
  det.rhs = 1.0;
  det.slack = det.lhs - det.rhs;
  rep.add(det);
  rep.metric("rho", t.rho.value());
  rep.finalize();
  res.reports.push_back(rep);

  Json tj;
  tj["n"] = tc.n;
  tj["m"] = tc.m;
  tj["gap"] = tc.gap;
  tj["step"] = tc.step;
  tj["dim"] = tc.dim;
  tj["per_axis"] = t.per_axis;
  tj["remainder"] = t.remainder;
  Json corners = Json::array();
  for (const auto& b : t.sub_boxes) corners.push_back(tc.dim == 1 ? Json::array({b.corner[0]}) : Json::array({b.corner[0], b.corner[1]}));
  tj["sub_box_corners"] = corners;
  tj["margin_sites"] = t.margin.size();
  tj["rho_num"] = t.rho.num;
  tj["rho_den"] = t.rho.den;
  res.documents.emplace_back("tiling", tj.dump());

  const RhoLimitReport rl = rho_limit_check(tc.m_sequence, tc.rho_gap, tc.step, n_of_m_rule(tc.n_of_m), tc.dim, tc.thresholds);
  write_to(res, "rho_table.csv", [&](std::ostream& os) {
    os << "m,n,gap,rho_num,rho_den,rho,upper_estimate\n";
    for (const auto& s : rl.samples)
      os << s.m << ',' << s.n << ',' << s.gap << ',' << s.rho.num << ',' << s.rho.den << ','
         << format_double(s.rho.value()) << ',' << format_double(s.upper_estimate) << '\n';
  });
  VerificationReport rho;
  rho.id = "rho_limit";
  rho.model = "n_of_m=" + tc.n_of_m;
  for (std::size_t i = 0; i < rl.thresholds.size(); ++i) {
    CheckRecord r;
    r.label = "threshold=" + format_double(rl.thresholds[i]);
    r.lhs = rl.thresholds[i];
    r.rhs = rl.samples.empty() ? kInf : rl.samples.back().rho.value();
    r.slack = r.lhs - r.rhs;
    if (r.slack == 0.0) r.slack = -1.0;
    rho.add(std::move(r));
  }
  rho.metric("monotone_nonincreasing", rl.monotone_nonincreasing ? 1.0 : 0.0);
  rho.finalize();
  res.reports.push_back(rho);
  finish(res, cfg);
  return res;
}

RunResult run_check_hypotheses(const ExperimentConfig& cfg) {
  const FieldModel& model = cfg.field();
  RunResult res;
  res.command = "check-hypotheses";
  try {
    VerificationReport dec = check_decoupling(model, cfg.events.box_side, event_options(cfg, 1));
    dec.model = cfg.model_name;
    res.reports.push_back(std::move(dec));
  } catch (const BudgetExceeded& e) {
    res.reports.push_back(inconclusive_report("decoupling", cfg.model_name, e.what()));
  }
  try {
    VerificationReport lc = check_local_control(model, cube(model.value_dim(), cfg.events.radius), event_options(cfg, 2));
    lc.model = cfg.model_name;
    res.reports.push_back(std::move(lc));
  } catch (const BudgetExceeded& e) {
    res.reports.push_back(inconclusive_report("local_control", cfg.model_name, e.what()));
  }
  finish(res, cfg);
  return res;
}

RunResult run_pressure(const ExperimentConfig& cfg) {
  const FieldModel& model = cfg.field();
  const auto axes = cfg.lambda_axes();
  RunResult res;
  res.command = "pressure";

  VerificationReport convex;
  convex.id = "pressure_convexity";
  convex.model = cfg.model_name;
  convex.mode = to_string(cfg.mode);
  convex.tolerance = cfg.tolerances.inequality;
  auto add_curve = [&](const PressureCurve& c, const std::string& file) {
    write_to(res, file, [&](std::ostream& os) { c.write_csv(os); });
    CheckRecord r;
    r.label = "volume=" + c.volume;
    r.lhs = 0.0;
    r.rhs = pressure_convexity_violation(c);
    r.slack = -r.rhs;
    convex.add(std::move(r));
  };
  add_curve(pressure_curve_limit(model, axes), "pressure_limit.csv");
  for (std::size_t i = 0; i < cfg.volumes.size(); ++i) {
    const int n = cfg.volumes[i];
    const PressureCurve c = cfg.mode == EvalMode::Exact
                                ? pressure_curve_finite(model, n, axes)
                                : pressure_curve_mc(model, n, axes, cfg.mc_samples, derive_seed(cfg.seed, 100 + i));
    add_curve(c, "pressure_n" + std::to_string(n) + ".csv");
  }
  convex.finalize();
  res.reports.push_back(convex);

  const auto lambdas = coarse_lambdas(axes);
  for (int m : cfg.events.sub_m)
    for (int n : cfg.events.sub_n)
      for (const auto& l : lambdas) {
        const auto params = scalar_field_params(model, l, m);
        if (n < m + params.gap + params.step) continue;
        VerificationReport r = pressure_subadditivity_check(model, l, m, n, params, cfg.tolerances.inequality);
        r.model = cfg.model_name;
        res.reports.push_back(std::move(r));
      }

  const std::vector<Site> sites =
      model.lattice_dim() == 1 ? std::vector<Site>{{1, 0}, {2, 0}} : std::vector<Site>{{1, 0}, {0, 1}};
  std::uint64_t stream = 10;
  for (const auto& l : lambdas) {
    if (std::all_of(l.begin(), l.end(), [](double v) { return v == 0.0; })) continue;
    const auto params = scalar_field_params(model, l, 1);
    if (!(params.alpha > 0.0) || !std::isfinite(params.t)) continue;
    const FieldModel scalar = affine_image(model, AffineMap::linear_functional(l));
    EventCheckOptions o = event_options(cfg, stream++);
    o.events = std::min(o.events, 20);
    VerificationReport r = residual_beta_check(scalar, sites, params.t, params.alpha, o);
    r.model = cfg.model_name + " <lambda,sigma> lambda=" + point_label(l);
    res.reports.push_back(std::move(r));
  }

  if (model.law() == FieldModel::Law::Block) {
    VerificationReport id = block_pressure_identity_check(model, lambdas, {2, 3}, cfg.tolerances.block_identity);
    id.model = cfg.model_name;
    res.reports.push_back(std::move(id));
  }
  finish(res, cfg);
  return res;
}

RunResult run_entropy(const ExperimentConfig& cfg) {
  const FieldModel& model = cfg.field();
  const int k = model.value_dim();
  RunResult res;
  res.command = "entropy";
  std::vector<EntropyEstimate> estimates;
  MeanLawCache laws(model);
  try {
    for (std::size_t xi = 0; xi < cfg.x_points.size(); ++xi)
      for (std::size_t ri = 0; ri < cfg.radii.size(); ++ri) {
        const ConvexShape v = cube(k, cfg.radii[ri]);
        if (cfg.mode == EvalMode::Exact)
          estimates.push_back(entropy_estimate(laws, cfg.x_points[xi], v, cfg.volumes));
        else
          estimates.push_back(entropy_estimate_mc(model, cfg.x_points[xi], v, cfg.volumes, cfg.mc_samples,
                                                  derive_seed(cfg.seed, 1000 + xi * cfg.radii.size() + ri)));
      }
  } catch (const BudgetExceeded& e) {
    res.reports.push_back(inconclusive_report("entropy_upper_bound", cfg.model_name,
                                              std::string(e.what()) + "; rerun with --mode mc"));
    finish(res, cfg);
    return res;
  }
  write_to(res, "entropy.csv", [&](std::ostream& os) { write_entropy_csv(os, estimates); });
  const GridFunction p = pressure_curve_limit(model, cfg.lambda_axes()).values;
  VerificationReport upper = upper_bound_check(estimates, p, cfg.upper_margin(), cfg.model_name, cfg.tolerances.exact);
  upper.mode = to_string(cfg.mode);
  res.reports.push_back(std::move(upper));
  finish(res, cfg);
  return res;
}

RunResult run_chebyshev(const ExperimentConfig& cfg) {
  const FieldModel& model = cfg.field();
  const int k = model.value_dim();
  const int d = model.lattice_dim();
  RunResult res;
  res.command = "chebyshev";
  const int max_n = d == 1 ? cfg.events.chebyshev_max_n
                           : std::max(1, static_cast<int>(std::sqrt(static_cast<double>(cfg.events.chebyshev_max_n))));

  std::vector<double> lo(static_cast<std::size_t>(k), kInf), hi(static_cast<std::size_t>(k), -kInf);
  for (const auto& a : model.values().atoms)
    for (int j = 0; j < k; ++j) {
      lo[static_cast<std::size_t>(j)] = std::min(lo[static_cast<std::size_t>(j)], a[static_cast<std::size_t>(j)]);
      hi[static_cast<std::size_t>(j)] = std::max(hi[static_cast<std::size_t>(j)], a[static_cast<std::size_t>(j)]);
    }

  std::mt19937_64 rng(derive_seed(cfg.seed, 3));
  std::uniform_int_distribution<int> pick_n(1, max_n);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  MeanLawCache laws(model);
  VerificationReport all;
  all.id = "chebyshev";
  all.model = cfg.model_name;
  all.tolerance = cfg.tolerances.exact;
  for (int c = 0; c < cfg.events.chebyshev_cases; ++c) {
    const int n = pick_n(rng);
    Point center(static_cast<std::size_t>(k));
    std::vector<double> radii(static_cast<std::size_t>(k));
    for (std::size_t j = 0; j < center.size(); ++j) {
      const double span = std::max(hi[j] - lo[j], 1e-9);
      center[j] = lo[j] + unit(rng) * span;
      radii[j] = (0.02 + 0.3 * unit(rng)) * span;
    }
    const ConvexNbhd a{center, ConvexShape::box(radii), 0.0};
    try {
      VerificationReport one = chebyshev_upper_check(laws, a, n, cfg.lambda_axes(), cfg.tolerances.exact);
      for (auto& r : one.records) all.add(r);
    } catch (const BudgetExceeded& e) {
      all.notes.push_back("n=" + std::to_string(n) + ": " + e.what());
      CheckRecord r;
      r.label = "n=" + std::to_string(n) + " skipped";
      r.slack = std::nan("");
      all.add(std::move(r));
    }
  }
  all.metric("cases", cfg.events.chebyshev_cases);
  all.metric("max_n", max_n);
  all.finalize();
  res.reports.push_back(std::move(all));
  finish(res, cfg);
  return res;
}

RunResult run_subadditive(const ExperimentConfig& cfg) {
  const FieldModel& model = cfg.field();
  const int k = model.value_dim();
  RunResult res;
  res.command = "subadditive";
  MeanLawCache laws(model);
  const ConvexShape v = cube(k, cfg.events.sub_radius);
  const Point& y = cfg.events.sub_center;
  const ConvexNbhd c{y, v, 0.0};
  Point x1(y), x2(y);
  x1[0] -= cfg.events.sub_radius;
  x2[0] += cfg.events.sub_radius;
  for (int m : cfg.events.sub_m) {
    const TilingParams params = tiling_params(model, y, v, m);
    for (int n : cfg.events.sub_n) {
      if (n < m + params.gap + params.step) continue;
      try {
        VerificationReport r = subadditive_lemma_check(laws, c, cfg.epsilon, cfg.delta, m, n, params, cfg.tolerances.inequality);
        r.model = cfg.model_name;
        res.reports.push_back(std::move(r));
        VerificationReport cc = concavity_check(laws, x1, x2, v, cfg.epsilon, m, n, params, cfg.tolerances.inequality);
        cc.model = cfg.model_name;
        res.reports.push_back(std::move(cc));
      } catch (const BudgetExceeded& e) {
        res.reports.push_back(inconclusive_report("subadditive_lemma", cfg.model_name, e.what()));
      }
    }
  }
  finish(res, cfg);
  return res;
}

RunResult run_lft(std::istream& input, const std::vector<GridAxis>& x_axes) {
  RunResult res;
  res.command = "lft";
  GridFunction f;
  try {
    f = GridFunction::read_csv(input);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("curve file: ") + e.what(), 0, "input");
  }
  VerificationReport rep;
  rep.id = "lft";
  rep.model = "input curve";
  rep.tolerance = 0.0;
  if (!f.proper()) {
    const std::string diag = f.properness_diagnostic();
    rep.notes.push_back(diag);
    CheckRecord r;
    r.label = "properness";
    r.lhs = 0.0;
    r.rhs = 1.0;
    r.slack = -1.0;
    rep.add(std::move(r));
    rep.finalize();
    res.reports.push_back(rep);
    res.summary.push_back("input is not proper: " + diag);
    finish(res, Json::object());
    return res;
  }
  auto axes = x_axes.empty() ? f.axes() : x_axes;
  if (axes.size() == 1 && f.dim() == 2) axes.push_back(axes.front());
  const Conjugate conj = lft(f, axes);
  write_to(res, "conjugate.csv", [&](std::ostream& os) { conj.function.write_csv(os, "x"); });

  if (static_cast<double>(f.size()) * static_cast<double>(conj.function.size()) <= 1e8) {
    double worst = kInf;
    for (std::size_t i = 0; i < f.size(); ++i) {
      const Point l = f.point(i);
      for (std::size_t j = 0; j < conj.function.size(); ++j) {
        const Point x = conj.function.point(j);
        worst = std::min(worst, inequality_slack(f.value(i) + conj.function.value(j), dot(l, x)));
      }
    }
    CheckRecord r;
    r.label = "fenchel_young";
    r.lhs = worst;
    r.rhs = 0.0;
    r.slack = worst;
    rep.tolerance = 1e-9;
    rep.add(std::move(r));
  } else {
    rep.notes.push_back("grid too large for the all-pairs Fenchel-Young check");
    CheckRecord r;
    r.label = "properness";
    r.slack = 0.0;
    rep.add(std::move(r));
  }
  rep.metric("input_convexity_violation", f.convexity_violation());
  rep.finalize();
  res.reports.push_back(rep);
  finish(res, Json::object());
  return res;
}

}  // namespace ldlab

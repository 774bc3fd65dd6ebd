#include "ldlab/pressure.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <ostream>
#include <random>
#include <sstream>
#include <stdexcept>

#include "ldlab/lattice_tiling.hpp"
#include "ldlab/numeric.hpp"

namespace ldlab {

const char* to_string(PressureMode m) {
  switch (m) {
    case PressureMode::Exact: return "exact";
    case PressureMode::TransferMatrix: return "transfer-matrix";
    case PressureMode::MonteCarlo: return "monte-carlo";
  }
  return "?";
}

namespace {

int floor_div(int a, int b) { return a >= 0 ? a / b : -((-a + b - 1) / b); }

std::vector<double> atom_tilts(const FieldModel& model, std::span<const double> lambda) {
  if (static_cast<int>(lambda.size()) != model.value_dim()) throw std::invalid_argument("pressure: lambda dimension mismatch");
  std::vector<double> w;
  for (const auto& a : model.values().atoms) w.push_back(dot(lambda, a));
  return w;
}

std::vector<bool> full_mask(const FieldModel& model, const std::vector<bool>& allowed) {
  if (allowed.empty()) return std::vector<bool>(static_cast<std::size_t>(model.num_atoms()), true);
  if (static_cast<int>(allowed.size()) != model.num_atoms()) throw std::invalid_argument("pressure: atom mask size mismatch");
  return allowed;
}

std::vector<bool> mask_of(const FieldModel& model, const std::vector<int>& atoms) {
  std::vector<bool> m(static_cast<std::size_t>(model.num_atoms()), false);
  for (int a : atoms) {
    if (a < 0 || a >= model.num_atoms()) throw std::invalid_argument("pressure: atom index out of range");
    m[static_cast<std::size_t>(a)] = true;
  }
  return m;
}

PressureMode exact_mode_of(const FieldModel& model) {
  return model.law() == FieldModel::Law::Markov ? PressureMode::TransferMatrix : PressureMode::Exact;
}

PressureCurve curve_from(const FieldModel& model, const std::vector<GridAxis>& axes, PressureMode mode,
                         std::string volume, const std::function<double(std::span<const double>)>& f) {
  PressureCurve c;
  c.values = GridFunction::tabulate(axes, f);
  c.ci_low = c.values.values();
  c.ci_high = c.values.values();
  c.mode = mode;
  c.model = model.describe();
  c.volume = std::move(volume);
  return c;
}

}  // namespace

double log_tilted_mass(const FieldModel& model, const BoxSpec& box, std::span<const double> lambda,
                       const std::vector<bool>& allowed_in) {
  if (box.dim != model.lattice_dim()) throw std::invalid_argument("log_tilted_mass: box dimension mismatch");
  const std::vector<double> w = atom_tilts(model, lambda);
  const std::vector<bool> allowed = full_mask(model, allowed_in);
  const int k = model.num_atoms();
  switch (model.law()) {
    case FieldModel::Law::Iid: {
      std::vector<double> terms;
      for (int a = 0; a < k; ++a)
        if (allowed[static_cast<std::size_t>(a)])
          terms.push_back(std::log(model.weights()[static_cast<std::size_t>(a)]) + w[static_cast<std::size_t>(a)]);
      const double site = log_sum_exp(terms);
      return site == -kInf ? -kInf : static_cast<double>(box.cardinality()) * site;
    }
    case FieldModel::Law::Markov: {
      const Matrix& p = model.transition();
      std::vector<double> v(static_cast<std::size_t>(k), -kInf);
      for (int a = 0; a < k; ++a)
        if (allowed[static_cast<std::size_t>(a)])
          v[static_cast<std::size_t>(a)] = std::log(model.stationary()[static_cast<std::size_t>(a)]) + w[static_cast<std::size_t>(a)];
      std::vector<double> next(static_cast<std::size_t>(k));
      std::vector<double> terms(static_cast<std::size_t>(k));
      for (int step = 1; step < box.side; ++step) {
        for (int b = 0; b < k; ++b) {
          if (!allowed[static_cast<std::size_t>(b)]) {
            next[static_cast<std::size_t>(b)] = -kInf;
            continue;
          }
          for (int a = 0; a < k; ++a)
            terms[static_cast<std::size_t>(a)] = v[static_cast<std::size_t>(a)] + std::log(p[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)]);
          next[static_cast<std::size_t>(b)] = log_sum_exp(terms) + w[static_cast<std::size_t>(b)];
        }
        std::swap(v, next);
      }
      return log_sum_exp(v);
    }
    case FieldModel::Law::Block: {
      const BlockLaw& bl = model.block_law();
      std::map<Site, std::vector<int>> groups;
      for (const auto& z : box.sites()) {
        Site c{0, 0};
        for (int i = 0; i < box.dim; ++i) c[static_cast<std::size_t>(i)] = floor_div(z[static_cast<std::size_t>(i)], bl.side) * bl.side;
        groups[c].push_back(box.dim == 1 ? z[0] - c[0] : (z[0] - c[0]) * bl.side + (z[1] - c[1]));
      }
      std::map<std::vector<int>, double> cache;
      double total = 0.0;
      for (const auto& [corner, positions] : groups) {
        auto it = cache.find(positions);
        if (it == cache.end()) {
          std::vector<double> terms;
          for (std::size_t j = 0; j < bl.configs.size(); ++j) {
            double s = std::log(bl.probs[j]);
            for (int pos : positions) {
              const int a = bl.configs[j][static_cast<std::size_t>(pos)];
              if (!allowed[static_cast<std::size_t>(a)]) {
                s = -kInf;
                break;
              }
              s += w[static_cast<std::size_t>(a)];
            }
            terms.push_back(s);
          }
          it = cache.emplace(positions, log_sum_exp(terms)).first;
        }
        total += it->second;
        if (total == -kInf) return -kInf;
      }
      return total;
    }
  }
  throw std::logic_error("log_tilted_mass: unknown law");
}

double pressure_finite(const FieldModel& model, int n, std::span<const double> lambda) {
  if (n < 1) throw std::invalid_argument("pressure_finite: n must be >= 1");
  const BoxSpec box = make_box(n, model.lattice_dim());
  return log_tilted_mass(model, box, lambda) / static_cast<double>(box.cardinality());
}

double pressure_finite_mean_law(const FieldModel& model, int n, std::span<const double> lambda, const ExactBudget& budget) {
  return mean_law_exact(model, n, budget).pressure(lambda);
}

PressureValue pressure_finite_mc(const FieldModel& model, int n, std::span<const double> lambda, int samples,
                                 std::uint64_t seed) {
  if (static_cast<int>(lambda.size()) != model.value_dim()) throw std::invalid_argument("pressure: lambda dimension mismatch");
  const auto means = sample_means(model, n, samples, seed);
  const double card = static_cast<double>(make_box(n, model.lattice_dim()).cardinality());
  std::vector<double> s;
  s.reserve(means.size());
  for (const auto& m : means) s.push_back(card * dot(lambda, m));
  const double log_mean = log_sum_exp(s) - std::log(static_cast<double>(samples));
  // Delta method on log of the sample mean of e^{S}, computed on the scale e^{S - max}.
  const double smax = *std::max_element(s.begin(), s.end());
  double mu = 0.0, sq = 0.0;
  for (double v : s) {
    const double u = std::exp(v - smax);
    mu += u;
    sq += u * u;
  }
  mu /= samples;
  const double var = samples > 1 ? std::max(0.0, (sq / samples - mu * mu) * samples / (samples - 1.0)) : kInf;
  const double se = std::sqrt(var / samples) / mu;
  PressureValue out;
  out.value = log_mean / card;
  out.ci_low = (log_mean - 1.96 * se) / card;
  out.ci_high = (log_mean + 1.96 * se) / card;
  out.mode = PressureMode::MonteCarlo;
  return out;
}

double log_perron_root(const Matrix& m, double tolerance, int max_iterations) {
  const std::size_t k = m.size();
  if (k == 0) throw std::invalid_argument("log_perron_root: empty matrix");
  for (const auto& row : m) {
    if (row.size() != k) throw std::invalid_argument("log_perron_root: matrix must be square");
    for (double v : row)
      if (!(v >= 0.0) || !std::isfinite(v)) throw std::invalid_argument("log_perron_root: entries must be finite and >= 0");
  }
  std::vector<double> v(k, 1.0 / static_cast<double>(k)), u(k);
  double root = 0.0;
  for (int it = 0; it < max_iterations; ++it) {
    double sum = 0.0;
    for (std::size_t b = 0; b < k; ++b) {
      double acc = 0.0;
      for (std::size_t a = 0; a < k; ++a) acc += v[a] * m[a][b];
      u[b] = acc;
      sum += acc;
    }
    if (!(sum > 0.0)) throw ConvergenceError("log_perron_root: iterate vanished (matrix is not primitive)");
    for (std::size_t b = 0; b < k; ++b) v[b] = u[b] / sum;
    if (it > 0 && std::abs(sum - root) < tolerance * sum) return std::log(sum);
    root = sum;
  }
  throw ConvergenceError("log_perron_root: no convergence within " + std::to_string(max_iterations) + " iterations");
}

double pressure_limit(const FieldModel& model, std::span<const double> lambda) {
  const std::vector<double> w = atom_tilts(model, lambda);
  switch (model.law()) {
    case FieldModel::Law::Iid: {
      std::vector<double> terms;
      for (std::size_t a = 0; a < w.size(); ++a) terms.push_back(std::log(model.weights()[a]) + w[a]);
      return log_sum_exp(terms);
    }
    case FieldModel::Law::Markov: {
      const double wmax = *std::max_element(w.begin(), w.end());
      Matrix t = model.transition();
      for (auto& row : t)
        for (std::size_t b = 0; b < row.size(); ++b) row[b] *= std::exp(w[b] - wmax);
      return log_perron_root(t) + wmax;
    }
    case FieldModel::Law::Block: {
      const BoxSpec block = make_box(model.block_side(), model.lattice_dim());
      return log_tilted_mass(model, block, lambda) / static_cast<double>(block.cardinality());
    }
  }
  throw std::logic_error("pressure_limit: unknown law");
}

double conditioned_block_pressure(const FieldModel& base, int m, const std::vector<int>& allowed,
                                  std::span<const double> lambda) {
  if (m < 1) throw std::invalid_argument("conditioned_block_pressure: m must be >= 1");
  const BoxSpec block = make_box(m, base.lattice_dim());
  const std::vector<bool> mask = mask_of(base, allowed);
  const Point zero(lambda.size(), 0.0);
  const double log_mass = log_tilted_mass(base, block, zero, mask);
  if (log_mass == -kInf) throw std::domain_error("conditioned_block_pressure: conditioning event has zero probability");
  return (log_tilted_mass(base, block, lambda, mask) - log_mass) / static_cast<double>(block.cardinality());
}

void PressureCurve::write_csv(std::ostream& os) const {
  if (values.dim() == 1)
    os << "lambda,value,mode,ci_low,ci_high\n";
  else
    os << "lambda_1,lambda_2,value,mode,ci_low,ci_high\n";
  for (std::size_t i = 0; i < values.size(); ++i) {
    for (double c : values.point(i)) os << format_double(c) << ',';
    os << format_double(values.value(i)) << ',' << to_string(mode) << ',' << format_double(ci_low[i]) << ','
       << format_double(ci_high[i]) << '\n';
  }
}

PressureCurve pressure_curve_limit(const FieldModel& model, const std::vector<GridAxis>& axes) {
  return curve_from(model, axes, exact_mode_of(model), "limit",
                    [&](std::span<const double> l) { return pressure_limit(model, l); });
}

PressureCurve pressure_curve_finite(const FieldModel& model, int n, const std::vector<GridAxis>& axes) {
  return curve_from(model, axes, exact_mode_of(model), std::to_string(n),
                    [&](std::span<const double> l) { return pressure_finite(model, n, l); });
}

PressureCurve pressure_curve_mc(const FieldModel& model, int n, const std::vector<GridAxis>& axes, int samples,
                                std::uint64_t seed) {
  PressureCurve c = curve_from(model, axes, PressureMode::MonteCarlo, std::to_string(n),
                               [](std::span<const double>) { return 0.0; });
  for (std::size_t i = 0; i < c.values.size(); ++i) {
    const PressureValue v = pressure_finite_mc(model, n, c.values.point(i), samples, seed);
    c.values.value(i) = v.value;
    c.ci_low[i] = v.ci_low;
    c.ci_high[i] = v.ci_high;
  }
  return c;
}

double pressure_convexity_violation(const PressureCurve& curve) { return curve.values.convexity_violation(); }

VerificationReport block_pressure_identity_check(const FieldModel& model, const std::vector<Point>& lambdas,
                                                 const std::vector<int>& multiples, double tolerance) {
  if (model.law() != FieldModel::Law::Block)
    throw std::invalid_argument("block_pressure_identity_check: model must be a product or conditioned block model");
  const int j = model.block_side();
  VerificationReport rep;
  rep.id = "block_pressure_identity";
  rep.model = model.describe();
  rep.tolerance = tolerance;
  rep.metric("block_side", j);
  for (const auto& l : lambdas) {
    const double pj = pressure_finite(model, j, l);
    std::ostringstream ls;
    for (std::size_t i = 0; i < l.size(); ++i) ls << (i ? "," : "") << format_double(l[i]);
    for (int k : multiples) {
      CheckRecord r;
      r.label = "lambda=" + ls.str() + " k=" + std::to_string(k);
      r.lhs = pressure_finite(model, k * j, l);
      r.rhs = pj;
      r.slack = -std::abs(r.lhs - r.rhs);
      rep.add(std::move(r));
    }
    CheckRecord r;
    r.label = "lambda=" + ls.str() + " limit";
    r.lhs = pressure_limit(model, l);
    r.rhs = pj;
    r.slack = -std::abs(r.lhs - r.rhs);
    rep.add(std::move(r));
  }
  rep.notes.push_back("two-sided identity: slack is -|lhs - rhs|");
  rep.finalize();
  return rep;
}

VerificationReport residual_beta_check(const FieldModel& scalar_model, const std::vector<Site>& sites, double t,
                                       double alpha, const EventCheckOptions& options, std::size_t max_patterns) {
  if (scalar_model.value_dim() != 1) throw std::invalid_argument("residual_beta_check: field must be scalar");
  if (!(t > 0.0) || !(alpha > 0.0 && alpha <= 1.0)) throw std::invalid_argument("residual_beta_check: need t > 0, alpha in (0, 1]");
  const Site origin{0, 0};
  if (std::find(sites.begin(), sites.end(), origin) != sites.end())
    throw std::invalid_argument("residual_beta_check: conditioning sites must exclude the origin");
  const int k = scalar_model.num_atoms();
  VerificationReport rep;
  rep.id = "residual_beta";
  rep.model = scalar_model.describe();
  rep.tolerance = options.tolerance;
  rep.metric("t", t);
  rep.metric("alpha", alpha);
  rep.metric("beta", std::exp(-t) * alpha);

  auto evaluate = [&](const CylinderEvent& d, const std::string& label) {
    const double ld = log_probability(scalar_model, d);
    if (ld == -kInf) return;
    std::vector<double> terms;
    for (int a = 0; a < k; ++a) {
      CylinderEvent joint = d;
      std::vector<bool> only(static_cast<std::size_t>(k), false);
      only[static_cast<std::size_t>(a)] = true;
      joint.constraints.push_back({origin, only});
      terms.push_back(scalar_model.values().atoms[static_cast<std::size_t>(a)][0] + log_probability(scalar_model, joint));
    }
    CheckRecord r;
    r.label = label;
    r.lhs = log_sum_exp(terms);
    r.rhs = -t + std::log(alpha) + ld;
    r.slack = inequality_slack(r.lhs, r.rhs);
    rep.add(std::move(r));
  };

  double patterns = 1.0;
  for (std::size_t i = 0; i < sites.size(); ++i) patterns *= k;
  if (!sites.empty() && patterns <= static_cast<double>(max_patterns)) {
    std::vector<int> digits(sites.size(), 0);
    for (std::size_t p = 0; p < static_cast<std::size_t>(patterns); ++p) {
      CylinderEvent d;
      std::string label = "pattern";
      for (std::size_t i = 0; i < sites.size(); ++i) {
        std::vector<bool> only(static_cast<std::size_t>(k), false);
        only[static_cast<std::size_t>(digits[i])] = true;
        d.constraints.push_back({sites[i], only});
        label += " " + std::to_string(digits[i]);
      }
      evaluate(d, label);
      for (std::size_t i = 0; i < digits.size() && ++digits[i] == k; ++i) digits[i] = 0;
    }
  } else {
    rep.notes.push_back("pattern enumeration skipped: too many atom patterns");
  }

  // Random convex cylinders: an interval of atoms (in value order) per site.
  std::vector<int> order(static_cast<std::size_t>(k));
  for (int a = 0; a < k; ++a) order[static_cast<std::size_t>(a)] = a;
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    return scalar_model.values().atoms[static_cast<std::size_t>(a)][0] < scalar_model.values().atoms[static_cast<std::size_t>(b)][0];
  });
  std::mt19937_64 rng(derive_seed(options.seed, 0xbe7a));
  std::uniform_int_distribution<int> pick(0, k - 1);
  for (int e = 0; e < options.events && !sites.empty(); ++e) {
    CylinderEvent d;
    for (const auto& z : sites) {
      int lo = pick(rng), hi = pick(rng);
      if (lo > hi) std::swap(lo, hi);
      std::vector<bool> mask(static_cast<std::size_t>(k), false);
      for (int i = lo; i <= hi; ++i) mask[static_cast<std::size_t>(order[static_cast<std::size_t>(i)])] = true;
      d.constraints.push_back({z, mask});
    }
    evaluate(d, "cylinder " + std::to_string(e));
  }
  if (options.mode == EvalMode::MonteCarlo) rep.notes.push_back("evaluated exactly; Monte Carlo mode is not needed here");
  rep.finalize();
  return rep;
}

PressureSubadditivityParams scalar_field_params(const FieldModel& model, std::span<const double> lambda, int m) {
  PressureSubadditivityParams p;
  p.gap = model.params().decoupling.gap.int_at(m);
  p.cost = model.params().decoupling.cost.at(m);
  p.step = model.step();
  const bool zero = std::all_of(lambda.begin(), lambda.end(), [](double v) { return v == 0.0; });
  if (zero) {
    // <0, sigma> is identically 0, which lies in tV for every t > 0.
    p.t = 1e-12;
    p.alpha = 1.0;
    return p;
  }
  const FieldModel scalar = affine_image(model, AffineMap::linear_functional(Point(lambda.begin(), lambda.end())));
  const LocalControlEntry e = scalar.params().local_control(ConvexShape::interval(1.0).as_gauge());
  p.t = e.t;
  p.alpha = e.alpha;
  return p;
}

VerificationReport pressure_subadditivity_check(const FieldModel& model, std::span<const double> lambda, int m, int n,
                                                const PressureSubadditivityParams& params, double tolerance) {
  const Tiling tl = tile(n, m, params.gap, params.step, model.lattice_dim());
  const double rho = tl.rho.value();
  const double card_m = std::pow(static_cast<double>(m), model.lattice_dim());
  VerificationReport rep;
  rep.id = "pressure_subadditivity";
  rep.model = model.describe();
  rep.tolerance = tolerance;
  rep.metric("m", m);
  rep.metric("n", n);
  rep.metric("rho", rho);
  rep.metric("gap", params.gap);
  rep.metric("cost", params.cost);
  rep.metric("t", params.t);
  rep.metric("alpha", params.alpha);
  CheckRecord r;
  std::ostringstream ls;
  for (std::size_t i = 0; i < lambda.size(); ++i) ls << (i ? "," : "") << format_double(lambda[i]);
  r.label = "lambda=" + ls.str() + " m=" + std::to_string(m) + " n=" + std::to_string(n);
  r.lhs = pressure_finite(model, n, lambda);
  const double pm = pressure_finite(model, m, lambda);
  r.rhs = (1.0 - rho) * pm - params.cost / card_m - rho * (params.t - std::log(params.alpha));
  r.slack = inequality_slack(r.lhs, r.rhs);
  rep.add(std::move(r));
  rep.finalize();
  return rep;
}

}  // namespace ldlab

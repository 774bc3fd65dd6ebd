#include "ldlab/entropy_ldp.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "ldlab/convex_duality.hpp"
#include "ldlab/lattice_tiling.hpp"
#include "ldlab/numeric.hpp"

namespace ldlab {

const MeanLaw& MeanLawCache::get(int n) {
  auto it = laws_.find(n);
  if (it == laws_.end()) it = laws_.emplace(n, mean_law_exact(*model_, n, budget_)).first;
  return it->second;
}

double MeanLawCache::log_prob_over_volume(int n, const ConvexNbhd& set) {
  const MeanLaw& law = get(n);
  return law.log_prob_in(set) / static_cast<double>(law.sites);
}

namespace {

std::string point_label(const Point& p) {
  std::ostringstream os;
  for (std::size_t i = 0; i < p.size(); ++i) os << (i ? "," : "") << format_double(p[i]);
  return os.str();
}

void summarise(EntropyEstimate& e) {
  if (e.values.empty()) throw std::invalid_argument("entropy_estimate: volume list is empty");
  e.s_est = e.values.back();
  const std::size_t half = e.values.size() / 2;
  const auto first = e.values.begin() + static_cast<std::ptrdiff_t>(half);
  e.liminf_proxy = *std::min_element(first, e.values.end());
  const double hi = *std::max_element(first, e.values.end());
  e.tail_oscillation = (std::isfinite(hi) && std::isfinite(e.liminf_proxy)) ? hi - e.liminf_proxy : kInf;
  e.minus_infinity = std::all_of(e.values.begin(), e.values.end(), [](double v) { return v == -kInf; });
  if (e.minus_infinity) e.tail_oscillation = 0.0;
}

void require_increasing(const std::vector<int>& volumes) {
  for (std::size_t i = 0; i < volumes.size(); ++i) {
    if (volumes[i] < 1) throw std::invalid_argument("entropy_estimate: volumes must be >= 1");
    if (i > 0 && volumes[i] <= volumes[i - 1]) throw std::invalid_argument("entropy_estimate: volumes must increase");
  }
}

double volume_of(int side, int dim) { return std::pow(static_cast<double>(side), dim); }

}  // namespace

EntropyEstimate entropy_estimate(MeanLawCache& laws, const Point& x, const ConvexShape& shape,
                                 const std::vector<int>& volumes) {
  require_increasing(volumes);
  if (static_cast<int>(x.size()) != shape.dim() || shape.dim() != laws.model().value_dim())
    throw std::invalid_argument("entropy_estimate: dimension mismatch");
  EntropyEstimate e;
  e.x = x;
  e.shape = shape;
  e.volumes = volumes;
  const ConvexNbhd set{x, shape, 0.0};
  for (int n : volumes) {
    e.values.push_back(laws.log_prob_over_volume(n, set));
    e.std_errors.push_back(0.0);
  }
  summarise(e);
  return e;
}

EntropyEstimate entropy_estimate(const FieldModel& model, const Point& x, const ConvexShape& shape,
                                 const std::vector<int>& volumes, const ExactBudget& budget) {
  MeanLawCache laws(model, budget);
  return entropy_estimate(laws, x, shape, volumes);
}

EntropyEstimate entropy_estimate_mc(const FieldModel& model, const Point& x, const ConvexShape& shape,
                                    const std::vector<int>& volumes, int samples, std::uint64_t seed) {
  require_increasing(volumes);
  if (static_cast<int>(x.size()) != shape.dim() || shape.dim() != model.value_dim())
    throw std::invalid_argument("entropy_estimate: dimension mismatch");
  EntropyEstimate e;
  e.x = x;
  e.shape = shape;
  e.volumes = volumes;
  e.mode = EvalMode::MonteCarlo;
  const ConvexNbhd set{x, shape, 0.0};
  for (std::size_t v = 0; v < volumes.size(); ++v) {
    const int n = volumes[v];
    const auto means = sample_means(model, n, samples, derive_seed(seed, static_cast<std::uint64_t>(n)));
    const auto hits = std::count_if(means.begin(), means.end(), [&](const Point& m) { return set.contains(m); });
    const double card = volume_of(n, model.lattice_dim());
    const double p = static_cast<double>(hits) / samples;
    e.values.push_back(hits == 0 ? -kInf : std::log(p) / card);
    e.std_errors.push_back(hits == 0 ? kInf : std::sqrt((1.0 - p) / (samples * p)) / card);
  }
  summarise(e);
  return e;
}

void write_entropy_csv(std::ostream& os, const std::vector<EntropyEstimate>& estimates) {
  const std::size_t k = estimates.empty() ? 1 : estimates.front().x.size();
  os << (k == 1 ? "x" : "x_1,x_2") << ",radius,n,log_prob_over_volume,mode\n";
  for (const auto& e : estimates) {
    const auto& r = e.shape.radii();
    const double radius = *std::max_element(r.begin(), r.end());
    for (std::size_t i = 0; i < e.volumes.size(); ++i) {
      for (double c : e.x) os << format_double(c) << ',';
      os << format_double(radius) << ',' << e.volumes[i] << ',' << format_double(e.values[i]) << ','
         << (e.mode == EvalMode::Exact ? "exact" : "mc") << '\n';
    }
  }
}

TilingParams tiling_params(const FieldModel& model, const Point& y, const ConvexShape& shape, int m) {
  TilingParams p;
  p.gap = model.params().decoupling.gap.int_at(m);
  p.cost = model.params().decoupling.cost.at(m);
  p.step = model.step();
  Point neg(y);
  for (double& v : neg) v = -v;
  const FieldModel centred = affine_image(model, AffineMap::translation(neg));
  const LocalControlEntry e = centred.params().local_control(shape.as_gauge());
  p.t = e.t;
  p.alpha = e.alpha;
  return p;
}

VerificationReport subadditive_lemma_check(MeanLawCache& laws, const ConvexNbhd& c, double eps, double delta, int m,
                                           int n, const TilingParams& params, double tolerance) {
  if (!(eps > 0.0 && eps < 1.0)) throw std::invalid_argument("subadditive_lemma_check: eps must lie in (0, 1)");
  if (!(delta > 0.0)) throw std::invalid_argument("subadditive_lemma_check: delta must be > 0");
  const FieldModel& model = laws.model();
  const int d = model.lattice_dim();
  const Tiling tl = tile(n, m, params.gap, params.step, d);
  const double rho = tl.rho.value();
  const double card_m = volume_of(m, d);
  const bool premise = rho == 0.0 || eps / rho > params.t;

  VerificationReport rep;
  rep.id = "subadditive_lemma";
  rep.model = model.describe();
  rep.tolerance = tolerance;
  rep.metric("m", m);
  rep.metric("n", n);
  rep.metric("k", tl.per_axis);
  rep.metric("rho", rho);
  rep.metric("epsilon", eps);
  rep.metric("delta", delta);
  rep.metric("gap", params.gap);
  rep.metric("cost", params.cost);
  rep.metric("t", params.t);
  rep.metric("alpha", params.alpha);

  const double lhs = laws.log_prob_over_volume(n, c);
  const double small = laws.log_prob_over_volume(m, c.shrunk(eps));
  const double correction = -params.cost / card_m + rho * std::log(params.alpha);
  const std::string where = " y=" + point_label(c.center) + " m=" + std::to_string(m) + " n=" + std::to_string(n);

  CheckRecord refined;
  refined.label = "refined" + where;
  refined.lhs = lhs;
  refined.rhs = small + correction;
  refined.slack = inequality_slack(refined.lhs, refined.rhs);
  refined.premise_holds = premise;
  rep.add(std::move(refined));

  CheckRecord delta_form;
  delta_form.label = "delta" + where;
  delta_form.lhs = lhs;
  delta_form.rhs = small - delta;
  delta_form.slack = inequality_slack(delta_form.lhs, delta_form.rhs);
  delta_form.premise_holds = premise && correction >= -delta;
  rep.add(std::move(delta_form));

  if (!premise) rep.notes.push_back("premise eps/rho > t fails; violations are reported as inconclusive");
  rep.finalize();
  return rep;
}

VerificationReport concavity_check(MeanLawCache& laws, const Point& x1, const Point& x2, const ConvexShape& shape,
                                   double eps, int m, int n, const TilingParams& params, double tolerance) {
  if (!(eps > 0.0 && eps < 1.0)) throw std::invalid_argument("concavity_check: eps must lie in (0, 1)");
  const FieldModel& model = laws.model();
  const int d = model.lattice_dim();
  const Tiling tl = tile(n, m, params.gap, params.step, d);
  const auto boxes = static_cast<std::int64_t>(tl.sub_boxes.size());
  const std::int64_t paired = 2 * (boxes / 2);
  const double card_n = volume_of(n, d), card_m = volume_of(m, d);
  const double rho = 1.0 - static_cast<double>(paired) * card_m / card_n;
  const bool premise = rho == 0.0 || eps / rho > params.t;

  Point mid(x1.size());
  for (std::size_t i = 0; i < mid.size(); ++i) mid[i] = 0.5 * (x1[i] + x2[i]);
  const ConvexNbhd a{mid, shape, 0.0};
  const ConvexNbhd ax = ConvexNbhd{x1, shape, 0.0}.shrunk(eps);
  const ConvexNbhd ay = ConvexNbhd{x2, shape, 0.0}.shrunk(eps);

  const double lhs = laws.log_prob_over_volume(n, a);
  const double sx = laws.log_prob_over_volume(m, ax);
  const double sy = laws.log_prob_over_volume(m, ay);
  const double blocks = 0.5 * static_cast<double>(paired) * card_m / card_n * (sx + sy);
  const double rhs = rho * std::log(params.alpha) - params.cost * static_cast<double>(std::max<std::int64_t>(paired - 1, 0)) / card_n +
                     (paired > 0 ? blocks : 0.0);

  VerificationReport rep;
  rep.id = "concavity";
  rep.model = model.describe();
  rep.tolerance = tolerance;
  rep.metric("m", m);
  rep.metric("n", n);
  rep.metric("paired_boxes", static_cast<double>(paired));
  rep.metric("rho_effective", rho);
  rep.metric("epsilon", eps);
  rep.metric("t", params.t);
  rep.metric("alpha", params.alpha);
  rep.metric("s_m_Ax", sx);
  rep.metric("s_m_Ay", sy);
  const double half = 0.5 * (sx + sy);
  rep.metric("tiling_correction", (std::isfinite(half) && std::isfinite(rhs)) ? half - rhs : kInf);

  CheckRecord r;
  r.label = "x1=" + point_label(x1) + " x2=" + point_label(x2) + " m=" + std::to_string(m) + " n=" + std::to_string(n);
  r.lhs = lhs;
  r.rhs = rhs;
  r.slack = inequality_slack(lhs, rhs);
  r.premise_holds = premise;
  rep.add(std::move(r));
  if (!premise) rep.notes.push_back("premise eps/rho > t fails; violations are reported as inconclusive");
  rep.finalize();
  return rep;
}

VerificationReport chebyshev_upper_check(MeanLawCache& laws, const ConvexNbhd& a, int n,
                                         const std::vector<GridAxis>& lambda_axes, double tolerance) {
  const MeanLaw& law = laws.get(n);
  const double card = static_cast<double>(law.sites);
  const GridFunction grid = GridFunction::tabulate(lambda_axes, [](std::span<const double>) { return 0.0; });
  if (grid.dim() != law.value_dim) throw std::invalid_argument("chebyshev_upper_check: lambda grid dimension mismatch");
  double best = -kInf;
  Point arg;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const Point l = grid.point(i);
    const double v = a.min_linear(l) - law.pressure(l);
    if (v > best) {
      best = v;
      arg = l;
    }
  }
  VerificationReport rep;
  rep.id = "chebyshev";
  rep.model = laws.model().describe();
  rep.tolerance = tolerance;
  rep.metric("n", n);
  rep.metric("sup_exponent", best);
  for (std::size_t i = 0; i < arg.size(); ++i) rep.metric("argmax_lambda_" + std::to_string(i + 1), arg[i]);
  CheckRecord r;
  r.label = "A center=" + point_label(a.center) + " n=" + std::to_string(n);
  r.lhs = -card * best;            // log of the bound
  r.rhs = law.log_prob_in(a);      // log of the exact probability
  r.slack = inequality_slack(r.lhs, r.rhs);
  rep.add(std::move(r));
  rep.finalize();
  return rep;
}

VerificationReport upper_bound_check(const std::vector<EntropyEstimate>& estimates, const GridFunction& pressure,
                                     double margin, const std::string& model_name, double tolerance) {
  VerificationReport rep;
  rep.id = "entropy_upper_bound";
  rep.model = model_name;
  rep.tolerance = tolerance;
  rep.metric("margin", margin);
  for (const auto& e : estimates) {
    const double pstar = conjugate_at(pressure, e.x);
    const auto& r = e.shape.radii();
    const double radius = *std::max_element(r.begin(), r.end());
    for (std::size_t i = 0; i < e.volumes.size(); ++i) {
      CheckRecord rec;
      rec.label = "x=" + point_label(e.x) + " r=" + format_double(radius) + " n=" + std::to_string(e.volumes[i]);
      rec.lhs = -pstar + margin;
      rec.rhs = e.values[i];
      rec.slack = inequality_slack(rec.lhs, rec.rhs);
      rec.std_error = e.std_errors[i];
      rep.add(std::move(rec));
    }
  }
  rep.finalize();
  return rep;
}

}  // namespace ldlab

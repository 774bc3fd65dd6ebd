#include "ldlab/hypotheses.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <sstream>
#include <stdexcept>

#include "ldlab/numeric.hpp"

namespace ldlab {

const char* to_string(EvalMode m) { return m == EvalMode::Exact ? "exact" : "mc"; }

EvalMode parse_eval_mode(const std::string& s) {
  if (s == "exact") return EvalMode::Exact;
  if (s == "mc") return EvalMode::MonteCarlo;
  throw std::invalid_argument("mode must be 'exact' or 'mc', got '" + s + "'");
}

namespace {

struct ValueBounds {
  std::vector<double> lo, hi;
};

ValueBounds bounds_of(const ValueSpace& v) {
  ValueBounds b;
  b.lo.assign(static_cast<std::size_t>(v.dim), kInf);
  b.hi.assign(static_cast<std::size_t>(v.dim), -kInf);
  for (const auto& a : v.atoms)
    for (int j = 0; j < v.dim; ++j) {
      b.lo[static_cast<std::size_t>(j)] = std::min(b.lo[static_cast<std::size_t>(j)], a[static_cast<std::size_t>(j)]);
      b.hi[static_cast<std::size_t>(j)] = std::max(b.hi[static_cast<std::size_t>(j)], a[static_cast<std::size_t>(j)]);
    }
  return b;
}

ConvexNbhd random_value_box(const ValueBounds& b, std::mt19937_64& rng) {
  ConvexNbhd c;
  std::vector<double> radii;
  for (std::size_t j = 0; j < b.lo.size(); ++j) {
    const double span = std::max(b.hi[j] - b.lo[j], 1.0);
    std::uniform_real_distribution<double> center(b.lo[j] - 0.25 * span, b.hi[j] + 0.25 * span);
    std::uniform_real_distribution<double> radius(0.1 * span, 0.8 * span);
    c.center.push_back(center(rng));
    radii.push_back(radius(rng));
  }
  c.shape = ConvexShape::box(std::move(radii));
  return c;
}

Site random_site(int dim, int range, std::mt19937_64& rng) {
  std::uniform_int_distribution<int> u(-range, range);
  Site z{u(rng), 0};
  if (dim == 2) z[1] = u(rng);
  return z;
}

// Far sites at sup-distance in (gap, gap + 3] from the given site set.
std::vector<Site> random_far_sites(std::span<const Site> near, int dim, int gap, int count, std::mt19937_64& rng) {
  int lo[2] = {near[0][0], near[0][1]}, hi[2] = {near[0][0], near[0][1]};
  for (const auto& z : near)
    for (int i = 0; i < 2; ++i) {
      lo[i] = std::min(lo[i], z[static_cast<std::size_t>(i)]);
      hi[i] = std::max(hi[i], z[static_cast<std::size_t>(i)]);
    }
  const int reach = gap + 3;
  std::set<Site> out;
  int attempts = 0;
  while (static_cast<int>(out.size()) < count && attempts++ < 1000) {
    Site z{0, 0};
    for (int i = 0; i < dim; ++i) {
      std::uniform_int_distribution<int> u(lo[i] - reach, hi[i] + reach);
      z[static_cast<std::size_t>(i)] = u(rng);
    }
    int d = std::numeric_limits<int>::max();
    for (const auto& w : near) d = std::min(d, sup_distance(z, w));
    if (d > gap && d <= reach) out.insert(z);
  }
  return {out.begin(), out.end()};
}

struct EventPair {
  std::vector<Site> box_sites;
  CylinderEvent box_cylinder;            // per-site C, or empty when mean-type
  std::optional<MeanConstraint> box_mean;
  CylinderEvent far;                     // D
  std::string label;
};

CylinderEvent merge(const CylinderEvent& a, const CylinderEvent& b) {
  CylinderEvent e = a;
  e.constraints.insert(e.constraints.end(), b.constraints.begin(), b.constraints.end());
  return e;
}

// Bounding box of a site set, as a cube (d = 2) or interval (d = 1).
BoxSpec bounding_box(const std::vector<Site>& sites, int dim) {
  int lo[2] = {sites[0][0], sites[0][1]}, hi[2] = {sites[0][0], sites[0][1]};
  for (const auto& z : sites)
    for (int i = 0; i < 2; ++i) {
      lo[i] = std::min(lo[i], z[static_cast<std::size_t>(i)]);
      hi[i] = std::max(hi[i], z[static_cast<std::size_t>(i)]);
    }
  BoxSpec b;
  b.dim = dim;
  b.corner = {lo[0], dim == 2 ? lo[1] : 0};
  b.side = std::max(hi[0] - lo[0], dim == 2 ? hi[1] - lo[1] : 0) + 1;
  return b;
}

// Joint Monte Carlo estimate of P(A ∩ B), P(A), P(B) for two events given
// as predicates on a sampled configuration.
struct JointMc {
  McEstimate ab, a, b;
};

McEstimate finish(int hits, int samples) {
  McEstimate e;
  e.hits = hits;
  e.samples = samples;
  e.p = static_cast<double>(hits) / samples;
  e.std_error = e.p > 0.0 ? std::sqrt((1.0 - e.p) / (samples * e.p)) : kInf;  // of log p
  return e;
}

template <class PredA, class PredB>
JointMc joint_mc(const FieldModel& model, const BoxSpec& box, int samples, std::uint64_t seed, PredA&& pa, PredB&& pb) {
  int hab = 0, ha = 0, hb = 0;
  for (int i = 0; i < samples; ++i) {
    const Configuration cfg = sample(model, box, derive_seed(seed, static_cast<std::uint64_t>(i)));
    const bool a = pa(cfg), b = pb(cfg);
    ha += a;
    hb += b;
    hab += a && b;
  }
  return {finish(hab, samples), finish(ha, samples), finish(hb, samples)};
}

int index_of(const Configuration& cfg, const Site& z) {
  const auto it = std::lower_bound(cfg.sites.begin(), cfg.sites.end(), z);
  return static_cast<int>(it - cfg.sites.begin());
}

bool cylinder_holds(const Configuration& cfg, const CylinderEvent& e) {
  for (const auto& c : e.constraints)
    if (!c.allowed[static_cast<std::size_t>(cfg.atoms[static_cast<std::size_t>(index_of(cfg, c.site))])]) return false;
  return true;
}

bool mean_holds(const Configuration& cfg, const MeanConstraint& m, const ValueSpace& values) {
  Point mean(static_cast<std::size_t>(values.dim), 0.0);
  for (const auto& z : m.sites) {
    const auto& a = values.atoms[static_cast<std::size_t>(cfg.atoms[static_cast<std::size_t>(index_of(cfg, z))])];
    for (std::size_t j = 0; j < mean.size(); ++j) mean[j] += a[j];
  }
  for (double& v : mean) v /= static_cast<double>(m.sites.size());
  return m.set.contains(mean);
}

}  // namespace

VerificationReport check_decoupling(const FieldModel& model, int n, int gap, double cost,
                                    const EventCheckOptions& options) {
  if (n < 1) throw std::invalid_argument("check_decoupling: n must be >= 1");
  if (gap < 0 || cost < 0.0) throw std::invalid_argument("check_decoupling: need gap >= 0 and cost >= 0");
  VerificationReport rep;
  rep.id = "decoupling";
  rep.model = model.describe();
  rep.mode = to_string(options.mode);
  rep.tolerance = options.mode == EvalMode::Exact ? options.tolerance : 0.0;
  rep.metric("n", n);
  rep.metric("gap", gap);
  rep.metric("cost", cost);

  std::mt19937_64 rng(derive_seed(options.seed, 0xdec0));
  const ValueBounds vb = bounds_of(model.values());
  const int dim = model.lattice_dim();
  int degenerate = 0, mean_events = 0;

  for (int e = 0; e < options.events; ++e) {
    EventPair ev;
    double lc = -kInf, ld = -kInf;
    int attempts = 0;
    for (; attempts < 50; ++attempts) {
      ev = EventPair{};
      const Site z = random_site(dim, 3, rng);
      BoxSpec box;
      box.dim = dim;
      box.side = n;
      box.corner = z;
      ev.box_sites = box.sites();
      std::uniform_real_distribution<double> u01(0.0, 1.0);
      if (u01(rng) < options.mean_event_fraction) {
        ConvexNbhd a = random_value_box(vb, rng);
        // Keep mean events in the convex hull scale.
        ev.box_mean = MeanConstraint{ev.box_sites, a};
      } else {
        for (const auto& s : ev.box_sites)
          ev.box_cylinder.constraints.push_back({s, atoms_in(model.values(), random_value_box(vb, rng))});
      }
      std::uniform_int_distribution<int> count(1, options.max_far_sites);
      const auto far = random_far_sites(ev.box_sites, dim, gap, count(rng), rng);
      if (far.empty()) continue;
      for (const auto& s : far) ev.far.constraints.push_back({s, atoms_in(model.values(), random_value_box(vb, rng))});
      lc = log_probability(model, ev.box_cylinder, ev.box_mean);
      ld = log_probability(model, ev.far);
      if (lc > -kInf && ld > -kInf) break;
      ++degenerate;
    }
    if (attempts == 50) continue;
    mean_events += ev.box_mean.has_value();

    std::ostringstream label;
    label << "event " << e << (ev.box_mean ? " mean" : " cylinder") << " |S|=" << ev.far.constraints.size();
    CheckRecord r;
    r.label = label.str();
    if (options.mode == EvalMode::Exact) {
      const double lcd = log_probability(model, merge(ev.box_cylinder, ev.far), ev.box_mean);
      r.lhs = lcd;
      r.rhs = -cost + lc + ld;
      r.slack = inequality_slack(r.lhs, r.rhs);
    } else {
      std::vector<Site> all = ev.box_sites;
      for (const auto& c : ev.far.constraints) all.push_back(c.site);
      const BoxSpec bbox = bounding_box(all, dim);
      const auto& values = model.values();
      const JointMc mc = joint_mc(
          model, bbox, options.mc_samples, derive_seed(options.seed, 1000 + static_cast<std::uint64_t>(e)),
          [&](const Configuration& cfg) {
            return cylinder_holds(cfg, ev.box_cylinder) && (!ev.box_mean || mean_holds(cfg, *ev.box_mean, values));
          },
          [&](const Configuration& cfg) { return cylinder_holds(cfg, ev.far); });
      if (mc.ab.hits == 0 || mc.a.hits == 0 || mc.b.hits == 0) {
        r.lhs = r.rhs = std::nan("");
        r.slack = std::nan("");
      } else {
        r.lhs = std::log(mc.ab.p);
        r.rhs = -cost + std::log(mc.a.p) + std::log(mc.b.p);
        r.slack = r.lhs - r.rhs;
        r.std_error = std::sqrt(mc.ab.std_error * mc.ab.std_error + mc.a.std_error * mc.a.std_error +
                                mc.b.std_error * mc.b.std_error);
      }
    }
    rep.add(std::move(r));
  }
  rep.metric("degenerate_redraws", degenerate);
  rep.metric("mean_events", mean_events);
  rep.notes.push_back("coverage: finitely many random convex cylinder/mean events; the universal statement is not certified");
  rep.finalize();
  if (static_cast<int>(rep.records.size()) < options.events) rep.status = combine(rep.status, Status::Inconclusive);
  return rep;
}

VerificationReport check_decoupling(const FieldModel& model, int n, const EventCheckOptions& options) {
  const auto& p = model.params().decoupling;
  return check_decoupling(model, n, p.gap.int_at(n), p.cost.at(n), options);
}

VerificationReport check_local_control(const FieldModel& model, const ConvexShape& v, double t, double alpha,
                                       const EventCheckOptions& options) {
  if (!(t > 0.0) || !(alpha > 0.0 && alpha <= 1.0))
    throw std::invalid_argument("check_local_control: need t > 0 and alpha in (0, 1]");
  if (v.dim() != model.value_dim()) throw std::invalid_argument("check_local_control: V dimension mismatch");
  VerificationReport rep;
  rep.id = "local_control";
  rep.model = model.describe();
  rep.mode = to_string(options.mode);
  rep.tolerance = options.mode == EvalMode::Exact ? options.tolerance : 0.0;
  rep.metric("t", t);
  rep.metric("alpha", alpha);

  std::vector<bool> in_tv(static_cast<std::size_t>(model.num_atoms()));
  for (int a = 0; a < model.num_atoms(); ++a)
    in_tv[static_cast<std::size_t>(a)] = v.gauge(model.values().atoms[static_cast<std::size_t>(a)]) < t * (1.0 - kBoundaryGuard);

  std::mt19937_64 rng(derive_seed(options.seed, 0x10c));
  const ValueBounds vb = bounds_of(model.values());
  const int dim = model.lattice_dim();
  for (int e = 0; e < options.events; ++e) {
    Site z{};
    CylinderEvent d;
    double ld = -kInf;
    int attempts = 0;
    for (; attempts < 50; ++attempts) {
      z = random_site(dim, 3, rng);
      std::uniform_int_distribution<int> count(1, options.max_far_sites);
      const std::vector<Site> centre{z};
      const auto far = random_far_sites(centre, dim, 0, count(rng), rng);
      d = CylinderEvent{};
      for (const auto& s : far) d.constraints.push_back({s, atoms_in(model.values(), random_value_box(vb, rng))});
      if (d.constraints.empty()) continue;
      ld = log_probability(model, d);
      if (ld > -kInf) break;
    }
    if (attempts == 50) continue;
    CylinderEvent joint = d;
    joint.constraints.push_back({z, in_tv});
    CheckRecord r;
    r.label = "event " + std::to_string(e) + " |S|=" + std::to_string(d.constraints.size());
    if (options.mode == EvalMode::Exact) {
      r.lhs = log_probability(model, joint);
      r.rhs = std::log(alpha) + ld;
      r.slack = inequality_slack(r.lhs, r.rhs);
    } else {
      std::vector<Site> all{z};
      for (const auto& c : d.constraints) all.push_back(c.site);
      const JointMc mc = joint_mc(
          model, bounding_box(all, dim), options.mc_samples, derive_seed(options.seed, 5000 + static_cast<std::uint64_t>(e)),
          [&](const Configuration& cfg) { return cylinder_holds(cfg, joint); },
          [&](const Configuration& cfg) { return cylinder_holds(cfg, d); });
      if (mc.b.hits == 0) {
        r.lhs = r.rhs = r.slack = std::nan("");
      } else if (mc.ab.hits == 0) {
        r.lhs = -kInf;
        r.rhs = std::log(alpha) + std::log(mc.b.p);
        r.slack = -kInf;
      } else {
        // Conditional frequency against alpha.
        r.lhs = std::log(mc.ab.p);
        r.rhs = std::log(alpha) + std::log(mc.b.p);
        r.slack = r.lhs - r.rhs;
        const double q = static_cast<double>(mc.ab.hits) / mc.b.hits;
        r.std_error = std::sqrt((1.0 - q) / (mc.b.hits * q));
      }
    }
    rep.add(std::move(r));
  }
  rep.notes.push_back("coverage: finitely many random convex cylinder events D; z not in S");
  rep.finalize();
  if (static_cast<int>(rep.records.size()) < options.events) rep.status = combine(rep.status, Status::Inconclusive);
  return rep;
}

VerificationReport check_local_control(const FieldModel& model, const ConvexShape& v,
                                       const EventCheckOptions& options) {
  const LocalControlEntry e = model.params().local_control(v.as_gauge());
  if (!(e.alpha > 0.0) || !std::isfinite(e.t)) {
    VerificationReport rep;
    rep.id = "local_control";
    rep.model = model.describe();
    rep.mode = to_string(options.mode);
    rep.metric("t", e.t);
    rep.metric("alpha", e.alpha);
    rep.notes.push_back("the local-control rule makes no claim at this V (alpha = 0 or t = inf)");
    rep.finalize();
    return rep;
  }
  return check_local_control(model, v, e.t, e.alpha, options);
}

}  // namespace ldlab

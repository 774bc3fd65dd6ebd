#include "ldlab/mean_law.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <map>
#include <numeric>
#include <stdexcept>

#include "ldlab/numeric.hpp"

namespace ldlab {

namespace {

int floor_div(int a, int b) {
  int q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

void accumulate(std::unordered_map<std::uint64_t, double>& m, std::uint64_t key, double lp) {
  auto [it, inserted] = m.try_emplace(key, lp);
  if (!inserted) it->second = log_add_exp(it->second, lp);
}

void check_budget(std::size_t states, const ExactBudget& budget, const char* where) {
  if (states > budget.max_states)
    throw BudgetExceeded(std::string(where) + ": exact state space exceeds budget (" + std::to_string(states) + " > " +
                         std::to_string(budget.max_states) + ")");
}

struct SiteInfo {
  std::vector<bool> allowed;
  bool counted = false;
};

std::map<Site, SiteInfo> collect_sites(int num_atoms, const CylinderEvent& event, std::span<const Site> counted) {
  std::map<Site, SiteInfo> sites;
  auto get = [&](const Site& z) -> SiteInfo& {
    auto [it, inserted] = sites.try_emplace(z);
    if (inserted) it->second.allowed.assign(static_cast<std::size_t>(num_atoms), true);
    return it->second;
  };
  for (const auto& c : event.constraints) {
    if (static_cast<int>(c.allowed.size()) != num_atoms)
      throw std::invalid_argument("cylinder event: mask size must equal the number of atoms");
    SiteInfo& s = get(c.site);
    for (std::size_t a = 0; a < c.allowed.size(); ++a) s.allowed[a] = s.allowed[a] && c.allowed[a];
  }
  for (const auto& z : counted) get(z).counted = true;
  return sites;
}

}  // namespace

CountCodec::CountCodec(int num_atoms, std::int64_t max_count) : atoms_(num_atoms) {
  if (num_atoms < 1) throw std::invalid_argument("CountCodec: need at least one atom");
  bits_ = std::max(1, static_cast<int>(std::bit_width(static_cast<std::uint64_t>(std::max<std::int64_t>(max_count, 1)))));
  if (bits_ * atoms_ > 64) throw BudgetExceeded("CountCodec: count vector does not fit in 64 bits");
}

std::uint64_t CountCodec::unit(int atom) const { return std::uint64_t{1} << (bits_ * atom); }

std::uint64_t CountCodec::encode(std::span<const int> counts) const {
  std::uint64_t key = 0;
  for (int a = 0; a < atoms_; ++a) key |= static_cast<std::uint64_t>(counts[static_cast<std::size_t>(a)]) << (bits_ * a);
  return key;
}

void CountCodec::decode(std::uint64_t key, std::span<int> counts) const {
  const std::uint64_t mask = bits_ >= 64 ? ~std::uint64_t{0} : ((std::uint64_t{1} << bits_) - 1);
  for (int a = 0; a < atoms_; ++a) counts[static_cast<std::size_t>(a)] = static_cast<int>((key >> (bits_ * a)) & mask);
}

double CountLaw::log_total() const {
  std::vector<double> v;
  v.reserve(log_prob.size());
  for (const auto& [k, lp] : log_prob) v.push_back(lp);
  return log_sum_exp(v);
}

CountLaw convolve(const CountLaw& a, const CountLaw& b, const ExactBudget& budget) {
  CountLaw out;
  out.codec = a.codec;
  out.sites = a.sites + b.sites;
  check_budget(a.log_prob.size() * b.log_prob.size(), {budget.max_states * 16}, "convolve");
  for (const auto& [ka, la] : a.log_prob)
    for (const auto& [kb, lb] : b.log_prob) accumulate(out.log_prob, ka + kb, la + lb);
  check_budget(out.log_prob.size(), budget, "convolve");
  return out;
}

double MeanLaw::total_mass() const {
  return std::exp(log_sum_exp(log_probs));
}

double MeanLaw::log_prob_in(const ConvexNbhd& set) const {
  std::vector<double> in;
  for (std::size_t i = 0; i < means.size(); ++i)
    if (set.contains(means[i])) in.push_back(log_probs[i]);
  return log_sum_exp(in);
}

double MeanLaw::pressure(std::span<const double> lambda) const {
  const double n = static_cast<double>(sites);
  std::vector<double> terms(means.size());
  for (std::size_t i = 0; i < means.size(); ++i) terms[i] = log_probs[i] + n * dot(lambda, means[i]);
  return log_sum_exp(terms) / n;
}

MeanLaw to_mean_law(const CountLaw& counts, const ValueSpace& values) {
  const int k = values.size();
  if (k != counts.codec.num_atoms()) throw std::invalid_argument("to_mean_law: atom count mismatch");
  if (counts.sites < 1) throw std::invalid_argument("to_mean_law: no counted sites");
  std::vector<std::pair<Point, double>> pts;
  pts.reserve(counts.log_prob.size());
  std::vector<int> c(static_cast<std::size_t>(k));
  for (const auto& [key, lp] : counts.log_prob) {
    counts.codec.decode(key, c);
    Point mean(static_cast<std::size_t>(values.dim), 0.0);
    for (int a = 0; a < k; ++a)
      for (int j = 0; j < values.dim; ++j)
        mean[static_cast<std::size_t>(j)] += c[static_cast<std::size_t>(a)] * values.atoms[static_cast<std::size_t>(a)][static_cast<std::size_t>(j)];
    for (double& v : mean) v /= static_cast<double>(counts.sites);
    pts.emplace_back(std::move(mean), lp);
  }
  std::sort(pts.begin(), pts.end(), [](const auto& x, const auto& y) {
    if (x.first != y.first) return x.first < y.first;
    return x.second < y.second;
  });
  MeanLaw law;
  law.value_dim = values.dim;
  law.sites = counts.sites;
  auto close = [](const Point& a, const Point& b) {
    for (std::size_t i = 0; i < a.size(); ++i)
      if (std::abs(a[i] - b[i]) > 1e-12 * (1.0 + std::abs(a[i]))) return false;
    return true;
  };
  for (auto& [mean, lp] : pts) {
    if (!law.means.empty() && close(law.means.back(), mean)) {
      law.log_probs.back() = log_add_exp(law.log_probs.back(), lp);
    } else {
      law.means.push_back(std::move(mean));
      law.log_probs.push_back(lp);
    }
  }
  return law;
}

CountLaw joint_count_law(const FieldModel& model, const CylinderEvent& event, std::span<const Site> counted,
                         const ExactBudget& budget) {
  const int k = model.num_atoms();
  const auto sites = collect_sites(k, event, counted);
  CountLaw result;
  result.codec = CountCodec(k, static_cast<std::int64_t>(counted.size()));
  result.sites = 0;
  result.log_prob[0] = 0.0;
  if (sites.empty()) return result;
  for (const auto& [z, info] : sites) {
    if (model.lattice_dim() == 1 && z[1] != 0) throw std::invalid_argument("event site outside a 1-d lattice");
    if (info.counted) ++result.sites;
  }
  const CountCodec& codec = result.codec;

  switch (model.law()) {
    case FieldModel::Law::Iid: {
      std::vector<double> logw(static_cast<std::size_t>(k));
      for (int a = 0; a < k; ++a) logw[static_cast<std::size_t>(a)] = std::log(model.weights()[static_cast<std::size_t>(a)]);
      double scalar = 0.0;
      const auto counted_total = result.sites;
      for (const auto& [z, info] : sites) {
        if (!info.counted) {
          std::vector<double> v;
          for (int a = 0; a < k; ++a)
            if (info.allowed[static_cast<std::size_t>(a)]) v.push_back(logw[static_cast<std::size_t>(a)]);
          scalar += log_sum_exp(v);
          continue;
        }
        CountLaw unit;
        unit.codec = codec;
        unit.sites = 1;
        for (int a = 0; a < k; ++a)
          if (info.allowed[static_cast<std::size_t>(a)]) accumulate(unit.log_prob, codec.unit(a), logw[static_cast<std::size_t>(a)]);
        if (unit.log_prob.empty()) {
          result.log_prob.clear();
          return result;
        }
        result = convolve(result, unit, budget);
      }
      result.sites = counted_total;
      for (auto& [key, lp] : result.log_prob) lp += scalar;
      return result;
    }
    case FieldModel::Law::Markov: {
      const int x0 = sites.begin()->first[0];
      const int x1 = sites.rbegin()->first[0];
      const auto& p = model.transition();
      std::vector<std::vector<double>> logp(static_cast<std::size_t>(k), std::vector<double>(static_cast<std::size_t>(k)));
      for (int a = 0; a < k; ++a)
        for (int b = 0; b < k; ++b)
          logp[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)] = std::log(p[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)]);
      std::vector<std::unordered_map<std::uint64_t, double>> state(static_cast<std::size_t>(k));
      auto info_at = [&](int x) -> const SiteInfo* {
        auto it = sites.find(Site{x, 0});
        return it == sites.end() ? nullptr : &it->second;
      };
      {
        const SiteInfo* info = info_at(x0);
        for (int a = 0; a < k; ++a) {
          if (info && !info->allowed[static_cast<std::size_t>(a)]) continue;
          const std::uint64_t key = (info && info->counted) ? codec.unit(a) : 0;
          state[static_cast<std::size_t>(a)][key] = std::log(model.stationary()[static_cast<std::size_t>(a)]);
        }
      }
      for (int x = x0 + 1; x <= x1; ++x) {
        const SiteInfo* info = info_at(x);
        std::vector<std::unordered_map<std::uint64_t, double>> next(static_cast<std::size_t>(k));
        std::size_t total = 0;
        for (int b = 0; b < k; ++b) {
          if (info && !info->allowed[static_cast<std::size_t>(b)]) continue;
          const std::uint64_t add = (info && info->counted) ? codec.unit(b) : 0;
          auto& dst = next[static_cast<std::size_t>(b)];
          for (int a = 0; a < k; ++a) {
            const double lt = logp[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)];
            for (const auto& [key, lp] : state[static_cast<std::size_t>(a)]) accumulate(dst, key + add, lp + lt);
          }
          total += dst.size();
        }
        check_budget(total, budget, "markov count law");
        state = std::move(next);
      }
      result.log_prob.clear();
      for (const auto& st : state)
        for (const auto& [key, lp] : st) accumulate(result.log_prob, key, lp);
      return result;
    }
    case FieldModel::Law::Block: {
      const BlockLaw& bl = model.block_law();
      const int dim = model.lattice_dim();
      // corner -> list of (position in block, info)
      std::map<Site, std::vector<std::pair<int, const SiteInfo*>>> groups;
      for (const auto& [z, info] : sites) {
        Site c{0, 0};
        for (int i = 0; i < dim; ++i) c[static_cast<std::size_t>(i)] = floor_div(z[static_cast<std::size_t>(i)], bl.side) * bl.side;
        const int pos = dim == 1 ? z[0] - c[0] : (z[0] - c[0]) * bl.side + (z[1] - c[1]);
        groups[c].push_back({pos, &info});
      }
      const auto counted_total = result.sites;
      for (const auto& [corner, members] : groups) {
        CountLaw unit;
        unit.codec = codec;
        for (std::size_t j = 0; j < bl.configs.size(); ++j) {
          const auto& cfg = bl.configs[j];
          bool ok = true;
          std::uint64_t key = 0;
          for (const auto& [pos, info] : members) {
            const int a = cfg[static_cast<std::size_t>(pos)];
            if (!info->allowed[static_cast<std::size_t>(a)]) {
              ok = false;
              break;
            }
            if (info->counted) key += codec.unit(a);
          }
          if (ok) accumulate(unit.log_prob, key, std::log(bl.probs[j]));
        }
        if (unit.log_prob.empty()) {
          result.log_prob.clear();
          return result;
        }
        result = convolve(result, unit, budget);
      }
      result.sites = counted_total;
      return result;
    }
  }
  throw std::logic_error("joint_count_law: unknown law");
}

CountLaw count_law_exact(const FieldModel& model, const BoxSpec& box, const ExactBudget& budget) {
  const auto sites = box.sites();
  return joint_count_law(model, CylinderEvent{}, sites, budget);
}

MeanLaw mean_law_exact(const FieldModel& model, int n, const ExactBudget& budget) {
  if (n < 1) throw std::invalid_argument("mean_law_exact: n must be >= 1");
  const BoxSpec box = make_box(n, model.lattice_dim());
  if (model.law() != FieldModel::Law::Iid) return to_mean_law(count_law_exact(model, box, budget), model.values());

  // Multinomial enumeration of count vectors.
  const int k = model.num_atoms();
  const std::int64_t total = box.cardinality();
  double log_compositions = std::lgamma(static_cast<double>(total + k)) - std::lgamma(static_cast<double>(total + 1)) -
                            std::lgamma(static_cast<double>(k));
  if (log_compositions > std::log(static_cast<double>(budget.max_states)))
    throw BudgetExceeded("mean_law_exact: multinomial enumeration exceeds budget");
  std::vector<double> logw(static_cast<std::size_t>(k));
  for (int a = 0; a < k; ++a) logw[static_cast<std::size_t>(a)] = std::log(model.weights()[static_cast<std::size_t>(a)]);
  const double log_nfact = std::lgamma(static_cast<double>(total) + 1.0);

  CountLaw law;
  law.codec = CountCodec(k, total);
  law.sites = total;
  std::vector<int> c(static_cast<std::size_t>(k), 0);
  // Iterate over compositions c_0 + ... + c_{k-1} = total.
  auto rec = [&](auto&& self, int atom, std::int64_t left) -> void {
    if (atom == k - 1) {
      c[static_cast<std::size_t>(atom)] = static_cast<int>(left);
      double lp = log_nfact;
      for (int a = 0; a < k; ++a) {
        const int ca = c[static_cast<std::size_t>(a)];
        lp -= std::lgamma(ca + 1.0);
        if (ca > 0) lp += ca * logw[static_cast<std::size_t>(a)];
      }
      law.log_prob[law.codec.encode(c)] = lp;
      return;
    }
    for (std::int64_t v = 0; v <= left; ++v) {
      c[static_cast<std::size_t>(atom)] = static_cast<int>(v);
      self(self, atom + 1, left - v);
    }
  };
  rec(rec, 0, total);
  return to_mean_law(law, model.values());
}

double log_probability(const FieldModel& model, const CylinderEvent& event, const std::optional<MeanConstraint>& mean,
                       const ExactBudget& budget) {
  if (!mean) return joint_count_law(model, event, {}, budget).log_total();
  const CountLaw law = joint_count_law(model, event, mean->sites, budget);
  if (law.log_prob.empty()) return -kInf;
  return to_mean_law(law, model.values()).log_prob_in(mean->set);
}

std::vector<bool> atoms_in(const ValueSpace& values, const ConvexNbhd& box) {
  std::vector<bool> m(values.atoms.size());
  for (std::size_t a = 0; a < values.atoms.size(); ++a) m[a] = box.contains(values.atoms[a]);
  return m;
}

double log_conditioning_mass(const FieldModel& model, const BoxSpec& box, const std::vector<int>& allowed_atoms,
                             const ExactBudget& budget) {
  std::vector<bool> allowed(static_cast<std::size_t>(model.num_atoms()), false);
  for (int a : allowed_atoms) {
    if (a < 0 || a >= model.num_atoms()) throw std::invalid_argument("conditioning: atom index out of range");
    allowed[static_cast<std::size_t>(a)] = true;
  }
  CylinderEvent event;
  for (const auto& z : box.sites()) event.constraints.push_back({z, allowed});
  return log_probability(model, event, std::nullopt, budget);
}

double conditioning_mass(const FieldModel& model, int m, const std::vector<int>& allowed_atoms) {
  if (m < 1) throw std::invalid_argument("conditioning_mass: block side must be >= 1");
  return std::exp(log_conditioning_mass(model, make_box(m, model.lattice_dim()), allowed_atoms));
}

std::vector<Point> sample_means(const FieldModel& model, int n, int samples, std::uint64_t seed) {
  if (n < 1 || samples < 1) throw std::invalid_argument("sample_means: need n >= 1 and samples >= 1");
  const BoxSpec box = make_box(n, model.lattice_dim());
  const auto card = static_cast<double>(box.cardinality());
  std::vector<Point> out;
  out.reserve(static_cast<std::size_t>(samples));
  for (int i = 0; i < samples; ++i) {
    const Configuration cfg = sample(model, box, derive_seed(seed, static_cast<std::uint64_t>(i)));
    Point mean(static_cast<std::size_t>(model.value_dim()), 0.0);
    for (int a : cfg.atoms) {
      const auto& y = model.values().atoms[static_cast<std::size_t>(a)];
      for (std::size_t j = 0; j < mean.size(); ++j) mean[j] += y[j];
    }
    for (double& v : mean) v /= card;
    out.push_back(std::move(mean));
  }
  return out;
}

}  // namespace ldlab

#include "ldlab/field_model.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <random>
#include <sstream>
#include <stdexcept>

#include "ldlab/numeric.hpp"

namespace ldlab {

namespace {

int floor_div(int a, int b) {
  int q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

Site block_corner_of(const Site& z, int side, int dim) {
  Site c{0, 0};
  for (int i = 0; i < dim; ++i) c[i] = floor_div(z[i], side) * side;
  return c;
}

// Position of site z inside the block with the given corner (lexicographic).
int position_in_block(const Site& z, const Site& corner, int side, int dim) {
  if (dim == 1) return z[0] - corner[0];
  return (z[0] - corner[0]) * side + (z[1] - corner[1]);
}

void check_probability_vector(const std::vector<double>& w, const char* what) {
  double s = 0.0;
  for (double v : w) {
    if (!(v > 0.0)) throw std::invalid_argument(std::string(what) + ": entries must be positive");
    s += v;
  }
  if (std::abs(s - 1.0) > 1e-9) throw std::invalid_argument(std::string(what) + ": entries must sum to 1");
}

double sure_event_scale(double max_gauge) { return max_gauge * (1.0 + 1e-9) + 1e-12; }

}  // namespace

void ValueSpace::validate(bool require_distinct) const {
  if (dim < 1 || dim > 2) throw std::invalid_argument("ValueSpace: dim must be 1 or 2");
  if (atoms.empty()) throw std::invalid_argument("ValueSpace: at least one atom required");
  for (const auto& a : atoms)
    if (static_cast<int>(a.size()) != dim) throw std::invalid_argument("ValueSpace: atom dimension mismatch");
  if (require_distinct) {
    for (std::size_t i = 0; i < atoms.size(); ++i)
      for (std::size_t j = i + 1; j < atoms.size(); ++j)
        if (atoms[i] == atoms[j]) throw std::invalid_argument("ValueSpace: atoms must be distinct");
  }
}

ValueSpace scalar_values(const std::vector<double>& atoms) {
  ValueSpace v;
  v.dim = 1;
  for (double a : atoms) v.atoms.push_back({a});
  return v;
}

AffineMap AffineMap::scaling(double s, int dim) {
  AffineMap f;
  f.matrix.assign(static_cast<std::size_t>(dim), std::vector<double>(static_cast<std::size_t>(dim), 0.0));
  for (int i = 0; i < dim; ++i) f.matrix[static_cast<std::size_t>(i)][static_cast<std::size_t>(i)] = s;
  f.offset.assign(static_cast<std::size_t>(dim), 0.0);
  return f;
}

AffineMap AffineMap::translation(Point y0) {
  AffineMap f = scaling(1.0, static_cast<int>(y0.size()));
  f.offset = std::move(y0);
  return f;
}

AffineMap AffineMap::linear_functional(Point lambda) {
  AffineMap f;
  f.matrix = {std::move(lambda)};
  f.offset = {0.0};
  return f;
}

Point AffineMap::apply_linear(std::span<const double> y) const {
  if (static_cast<int>(y.size()) != in_dim()) throw std::invalid_argument("AffineMap: dimension mismatch");
  Point out(matrix.size(), 0.0);
  for (std::size_t r = 0; r < matrix.size(); ++r) out[r] = dot(matrix[r], y);
  return out;
}

Point AffineMap::apply(std::span<const double> y) const {
  Point out = apply_linear(y);
  for (std::size_t r = 0; r < out.size(); ++r) out[r] += offset[r];
  return out;
}

int AffineMap::rank() const {
  Matrix a = matrix;
  const int rows = out_dim(), cols = in_dim();
  int rank = 0;
  for (int c = 0; c < cols && rank < rows; ++c) {
    int piv = rank;
    for (int r = rank; r < rows; ++r)
      if (std::abs(a[r][c]) > std::abs(a[piv][c])) piv = r;
    if (std::abs(a[piv][c]) < 1e-12) continue;
    std::swap(a[piv], a[rank]);
    for (int r = rank + 1; r < rows; ++r) {
      const double f = a[r][c] / a[rank][c];
      for (int k = c; k < cols; ++k) a[r][k] -= f * a[rank][k];
    }
    ++rank;
  }
  return rank;
}

LocalControlRule sure_event_local_control(const ValueSpace& values) {
  return [atoms = values.atoms](const GaugeFn& gauge) {
    double g = 0.0;
    for (const auto& a : atoms) g = std::max(g, gauge(a));
    return LocalControlEntry{sure_event_scale(g), 1.0};
  };
}

std::vector<double> stationary_distribution(const Matrix& p) {
  const std::size_t k = p.size();
  // Solve pi (P - I) = 0 with sum(pi) = 1: replace the last equation by the
  // normalisation and eliminate.
  Matrix a(k, std::vector<double>(k + 1, 0.0));
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = 0; j < k; ++j) a[i][j] = p[j][i] - (i == j ? 1.0 : 0.0);
  }
  for (std::size_t j = 0; j < k; ++j) a[k - 1][j] = 1.0;
  a[k - 1][k] = 1.0;
  for (std::size_t c = 0; c < k; ++c) {
    std::size_t piv = c;
    for (std::size_t r = c; r < k; ++r)
      if (std::abs(a[r][c]) > std::abs(a[piv][c])) piv = r;
    if (std::abs(a[piv][c]) < 1e-300) throw std::domain_error("stationary_distribution: singular system");
    std::swap(a[piv], a[c]);
    for (std::size_t r = 0; r < k; ++r) {
      if (r == c) continue;
      const double f = a[r][c] / a[c][c];
      for (std::size_t j = c; j <= k; ++j) a[r][j] -= f * a[c][j];
    }
  }
  std::vector<double> pi(k);
  for (std::size_t i = 0; i < k; ++i) pi[i] = a[i][k] / a[i][i];
  return pi;
}

FieldModel FieldModel::iid(ValueSpace values, std::vector<double> weights, int lattice_dim) {
  values.validate(true);
  if (lattice_dim != 1 && lattice_dim != 2) throw std::invalid_argument("iid: lattice dim must be 1 or 2");
  if (weights.size() != values.atoms.size()) throw std::invalid_argument("iid: one weight per atom required");
  check_probability_vector(weights, "iid weights");
  FieldModel m;
  m.kind_ = Kind::Iid;
  m.law_ = Law::Iid;
  m.lattice_dim_ = lattice_dim;
  m.weights_ = std::move(weights);
  m.params_.decoupling = {IntTable::constant(0.0), IntTable::constant(0.0)};
  m.params_.local_control = sure_event_local_control(values);
  m.values_ = std::move(values);
  return m;
}

FieldModel FieldModel::markov(ValueSpace values, Matrix transition) {
  values.validate(true);
  const std::size_t k = values.atoms.size();
  if (transition.size() != k) throw std::invalid_argument("markov: transition must be K x K");
  double delta = kInf;
  for (const auto& row : transition) {
    if (row.size() != k) throw std::invalid_argument("markov: transition must be K x K");
    check_probability_vector(row, "markov transition row");
    for (double v : row) delta = std::min(delta, v);
  }
  FieldModel m;
  m.kind_ = Kind::Markov;
  m.law_ = Law::Markov;
  m.lattice_dim_ = 1;
  m.transition_ = std::move(transition);
  m.stationary_ = stationary_distribution(m.transition_);
  m.doeblin_delta_ = delta;
  m.params_.decoupling = {IntTable::constant(1.0), IntTable::constant(-2.0 * std::log(delta))};
  m.params_.local_control = sure_event_local_control(values);
  m.values_ = std::move(values);
  return m;
}

std::string FieldModel::describe() const {
  std::ostringstream os;
  switch (kind_) {
    case Kind::Iid: os << "iid"; break;
    case Kind::Markov: os << "markov"; break;
    case Kind::AffineImage: os << "affine(" << (base_ ? base_->describe() : "?") << ")"; break;
    case Kind::ProductOfMarginals: os << "product(m=" << block_.side << ", " << (base_ ? base_->describe() : "?") << ")"; break;
    case Kind::Conditioned: os << "conditioned(m=" << block_.side << ", " << (base_ ? base_->describe() : "?") << ")"; break;
  }
  if (kind_ == Kind::Iid || kind_ == Kind::Markov) os << "[" << num_atoms() << " atoms, d=" << lattice_dim_ << "]";
  return os.str();
}

std::vector<double> FieldModel::site_marginal(const Site& z) const {
  switch (law_) {
    case Law::Iid: return weights_;
    case Law::Markov: return stationary_;
    case Law::Block: {
      const Site c = block_corner_of(z, block_.side, lattice_dim_);
      const int pos = position_in_block(z, c, block_.side, lattice_dim_);
      std::vector<double> w(static_cast<std::size_t>(num_atoms()), 0.0);
      for (std::size_t i = 0; i < block_.configs.size(); ++i)
        w[static_cast<std::size_t>(block_.configs[i][static_cast<std::size_t>(pos)])] += block_.probs[i];
      return w;
    }
  }
  return {};
}

FieldModel affine_image(const FieldModel& model, const AffineMap& f) {
  if (f.in_dim() != model.value_dim()) throw std::invalid_argument("affine_image: map input dimension mismatch");
  if (f.out_dim() < 1 || f.out_dim() > 2) throw std::invalid_argument("affine_image: output dimension must be 1 or 2");
  if (static_cast<int>(f.offset.size()) != f.out_dim()) throw std::invalid_argument("affine_image: offset dimension mismatch");
  if (f.rank() != f.out_dim()) throw std::invalid_argument("affine_image: map must have full row rank");

  FieldModel out = model;
  out.kind_ = FieldModel::Kind::AffineImage;
  out.base_ = std::make_shared<const FieldModel>(model);
  out.values_.dim = f.out_dim();
  for (auto& a : out.values_.atoms) a = f.apply(a);

  const LocalControlRule base_rule = model.params().local_control;
  const AffineMap lin = f;
  const Point neg_offset = [&] {
    Point p = f.offset;
    for (double& v : p) v = -v;
    return p;
  }();
  out.params_.local_control = [base_rule, lin, neg_offset](const GaugeFn& gauge) {
    // Linear part: t(A^{-1} V), whose gauge is y -> M_V(A y).
    const GaugeFn preimage = [gauge, lin](std::span<const double> y) { return gauge(lin.apply_linear(y)); };
    LocalControlEntry e = base_rule(preimage);
    // Translation by +b is eta - (-b): t(V) + M_V(-b).
    e.t += gauge(neg_offset);
    return e;
  };
  return out;
}

FieldModel product_of_marginals(const FieldModel& model, int m) {
  if (m < 1) throw std::invalid_argument("product_of_marginals: block side must be >= 1");
  FieldModel out = model;
  out.kind_ = FieldModel::Kind::ProductOfMarginals;
  out.law_ = FieldModel::Law::Block;
  out.base_ = std::make_shared<const FieldModel>(model);
  out.block_ = restriction_law(model, make_box(m, model.lattice_dim()));
  out.step_ = m;
  out.weights_.clear();
  out.transition_.clear();
  out.stationary_.clear();
  return out;
}

FieldModel conditioned(const FieldModel& model, int m, const std::vector<int>& allowed_atoms) {
  if (m < 1) throw std::invalid_argument("conditioned: block side must be >= 1");
  std::vector<bool> allowed(static_cast<std::size_t>(model.num_atoms()), false);
  for (int a : allowed_atoms) {
    if (a < 0 || a >= model.num_atoms()) throw std::invalid_argument("conditioned: atom index out of range");
    allowed[static_cast<std::size_t>(a)] = true;
  }
  const BlockLaw law = restriction_law(model, make_box(m, model.lattice_dim()));
  BlockLaw cond;
  cond.side = law.side;
  cond.dim = law.dim;
  double mass = 0.0;
  for (std::size_t i = 0; i < law.configs.size(); ++i) {
    const auto& c = law.configs[i];
    if (std::all_of(c.begin(), c.end(), [&](int a) { return allowed[static_cast<std::size_t>(a)]; })) {
      cond.configs.push_back(c);
      cond.probs.push_back(law.probs[i]);
      mass += law.probs[i];
    }
  }
  if (!(mass > 0.0)) throw std::domain_error("conditioned: conditioning event has zero probability");
  for (double& p : cond.probs) p /= mass;

  FieldModel out = model;
  out.kind_ = FieldModel::Kind::Conditioned;
  out.law_ = FieldModel::Law::Block;
  out.base_ = std::make_shared<const FieldModel>(model);
  out.block_ = std::move(cond);
  out.step_ = m;
  out.weights_.clear();
  out.transition_.clear();
  out.stationary_.clear();
  return out;
}

namespace {

// Cartesian product of independent factors, each a list of (sub-config, prob)
// over a fixed list of target positions.
struct Factor {
  std::vector<int> positions;  // positions in the output config
  std::vector<std::vector<int>> configs;
  std::vector<double> probs;
};

BlockLaw combine_factors(const std::vector<Factor>& factors, int size, int side, int dim, std::size_t budget) {
  std::size_t total = 1;
  for (const auto& f : factors) {
    if (f.configs.empty()) throw std::logic_error("restriction_law: empty factor");
    if (total > budget / f.configs.size()) throw BudgetExceeded("restriction_law: configuration budget exceeded");
    total *= f.configs.size();
  }
  BlockLaw out;
  out.side = side;
  out.dim = dim;
  out.configs.reserve(total);
  out.probs.reserve(total);
  std::vector<std::size_t> idx(factors.size(), 0);
  std::vector<int> cfg(static_cast<std::size_t>(size), 0);
  for (std::size_t n = 0; n < total; ++n) {
    double p = 1.0;
    for (std::size_t f = 0; f < factors.size(); ++f) {
      const auto& sub = factors[f].configs[idx[f]];
      for (std::size_t j = 0; j < sub.size(); ++j) cfg[static_cast<std::size_t>(factors[f].positions[j])] = sub[j];
      p *= factors[f].probs[idx[f]];
    }
    out.configs.push_back(cfg);
    out.probs.push_back(p);
    for (std::size_t f = factors.size(); f-- > 0;) {
      if (++idx[f] < factors[f].configs.size()) break;
      idx[f] = 0;
    }
  }
  return out;
}

}  // namespace

BlockLaw restriction_law(const FieldModel& model, const BoxSpec& box, std::size_t budget) {
  if (box.dim != model.lattice_dim()) throw std::invalid_argument("restriction_law: box dimension mismatch");
  const auto sites = box.sites();
  const int size = static_cast<int>(sites.size());
  const std::size_t k = static_cast<std::size_t>(model.num_atoms());

  switch (model.law()) {
    case FieldModel::Law::Iid: {
      std::vector<Factor> factors;
      for (int i = 0; i < size; ++i) {
        Factor f;
        f.positions = {i};
        for (std::size_t a = 0; a < k; ++a) {
          f.configs.push_back({static_cast<int>(a)});
          f.probs.push_back(model.weights()[a]);
        }
        factors.push_back(std::move(f));
      }
      return combine_factors(factors, size, box.side, box.dim, budget);
    }
    case FieldModel::Law::Markov: {
      std::size_t total = 1;
      for (int i = 0; i < size; ++i) {
        if (total > budget / k) throw BudgetExceeded("restriction_law: configuration budget exceeded");
        total *= k;
      }
      BlockLaw out;
      out.side = box.side;
      out.dim = box.dim;
      std::vector<int> cfg(static_cast<std::size_t>(size), 0);
      for (std::size_t n = 0; n < total; ++n) {
        double p = model.stationary()[static_cast<std::size_t>(cfg[0])];
        for (int i = 1; i < size; ++i)
          p *= model.transition()[static_cast<std::size_t>(cfg[static_cast<std::size_t>(i - 1)])]
                                 [static_cast<std::size_t>(cfg[static_cast<std::size_t>(i)])];
        out.configs.push_back(cfg);
        out.probs.push_back(p);
        for (int i = size; i-- > 0;) {
          if (++cfg[static_cast<std::size_t>(i)] < static_cast<int>(k)) break;
          cfg[static_cast<std::size_t>(i)] = 0;
        }
      }
      return out;
    }
    case FieldModel::Law::Block: {
      const BlockLaw& bl = model.block_law();
      // Group box sites by the block containing them.
      std::map<Site, std::vector<std::pair<int, int>>> groups;  // corner -> (box position, block position)
      for (int i = 0; i < size; ++i) {
        const Site c = block_corner_of(sites[static_cast<std::size_t>(i)], bl.side, box.dim);
        groups[c].push_back({i, position_in_block(sites[static_cast<std::size_t>(i)], c, bl.side, box.dim)});
      }
      std::vector<Factor> factors;
      for (const auto& [corner, members] : groups) {
        std::map<std::vector<int>, double> marg;
        for (std::size_t j = 0; j < bl.configs.size(); ++j) {
          std::vector<int> sub;
          sub.reserve(members.size());
          for (const auto& mpos : members) sub.push_back(bl.configs[j][static_cast<std::size_t>(mpos.second)]);
          marg[sub] += bl.probs[j];
        }
        Factor f;
        for (const auto& mpos : members) f.positions.push_back(mpos.first);
        for (auto& [sub, p] : marg) {
          f.configs.push_back(sub);
          f.probs.push_back(p);
        }
        factors.push_back(std::move(f));
      }
      return combine_factors(factors, size, box.side, box.dim, budget);
    }
  }
  throw std::logic_error("restriction_law: unknown law");
}

Configuration sample(const FieldModel& model, const BoxSpec& box, std::uint64_t seed) {
  if (box.dim != model.lattice_dim()) throw std::invalid_argument("sample: box dimension mismatch");
  std::mt19937_64 rng(derive_seed(seed, 0x5a3d1e));
  Configuration out;
  out.sites = box.sites();
  out.atoms.assign(out.sites.size(), 0);
  switch (model.law()) {
    case FieldModel::Law::Iid: {
      std::discrete_distribution<int> draw(model.weights().begin(), model.weights().end());
      for (auto& a : out.atoms) a = draw(rng);
      break;
    }
    case FieldModel::Law::Markov: {
      std::discrete_distribution<int> start(model.stationary().begin(), model.stationary().end());
      std::vector<std::discrete_distribution<int>> rows;
      for (const auto& r : model.transition()) rows.emplace_back(r.begin(), r.end());
      int cur = start(rng);
      for (std::size_t i = 0; i < out.atoms.size(); ++i) {
        if (i > 0) cur = rows[static_cast<std::size_t>(cur)](rng);
        out.atoms[i] = cur;
      }
      break;
    }
    case FieldModel::Law::Block: {
      const BlockLaw& bl = model.block_law();
      std::discrete_distribution<std::size_t> draw(bl.probs.begin(), bl.probs.end());
      std::map<Site, std::size_t> chosen;  // lexicographic block order
      for (const auto& z : out.sites) chosen.emplace(block_corner_of(z, bl.side, box.dim), 0);
      for (auto& [corner, cfg] : chosen) cfg = draw(rng);
      for (std::size_t i = 0; i < out.sites.size(); ++i) {
        const Site c = block_corner_of(out.sites[i], bl.side, box.dim);
        out.atoms[i] = bl.configs[chosen[c]][static_cast<std::size_t>(position_in_block(out.sites[i], c, bl.side, box.dim))];
      }
      break;
    }
  }
  return out;
}

DoeblinCertificate doeblin_certificate(const FieldModel& model) {
  if (model.law() != FieldModel::Law::Markov) throw std::invalid_argument("doeblin_certificate: Markov model required");
  const auto& p = model.transition();
  const std::size_t k = p.size();
  DoeblinCertificate c;
  c.delta = model.doeblin_delta();
  c.kappa = kInf;
  c.column_min.assign(k, kInf);
  for (std::size_t b = 0; b < k; ++b) {
    double lo = kInf, hi = 0.0;
    for (std::size_t a = 0; a < k; ++a) {
      lo = std::min(lo, p[a][b]);
      hi = std::max(hi, p[a][b]);
    }
    c.column_min[b] = lo;
    c.kappa = std::min(c.kappa, lo / hi);
  }
  c.cost = -2.0 * std::log(c.delta);
  c.sharp_cost = -2.0 * std::log(c.kappa);
  c.gap = 1;
  return c;
}

LocalControlRule doeblin_local_control(const FieldModel& model, double t) {
  const DoeblinCertificate cert = doeblin_certificate(model);
  return [cert, t, atoms = model.values().atoms](const GaugeFn& gauge) {
    double mass = 0.0;
    for (std::size_t b = 0; b < atoms.size(); ++b)
      if (gauge(atoms[b]) < t) mass += cert.column_min[b];
    return LocalControlEntry{t, cert.kappa * mass};
  };
}

}  // namespace ldlab

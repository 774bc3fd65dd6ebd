#include "ldlab/lattice_tiling.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <stdexcept>

namespace ldlab {

int sup_distance(const Site& a, const Site& b) {
  return std::max(std::abs(a[0] - b[0]), std::abs(a[1] - b[1]));
}

std::int64_t BoxSpec::cardinality() const {
  std::int64_t c = 1;
  for (int i = 0; i < dim; ++i) c *= side;
  return c;
}

bool BoxSpec::contains(const Site& z) const {
  for (int i = 0; i < 2; ++i) {
    if (i < dim) {
      if (z[i] < corner[i] || z[i] >= corner[i] + side) return false;
    } else if (z[i] != 0) {
      return false;
    }
  }
  return true;
}

std::vector<Site> BoxSpec::sites() const {
  std::vector<Site> out;
  out.reserve(static_cast<std::size_t>(cardinality()));
  if (dim == 1) {
    for (int i = 0; i < side; ++i) out.push_back({corner[0] + i, 0});
  } else {
    for (int i = 0; i < side; ++i)
      for (int j = 0; j < side; ++j) out.push_back({corner[0] + i, corner[1] + j});
  }
  return out;
}

BoxSpec make_box(std::span<const int> corner, int side, int dim) {
  if (dim != 1 && dim != 2) throw std::invalid_argument("make_box: dim must be 1 or 2");
  if (side < 1) throw std::invalid_argument("make_box: side must be >= 1");
  if (corner.size() != static_cast<std::size_t>(dim))
    throw std::invalid_argument("make_box: corner dimension does not match dim");
  BoxSpec b;
  b.side = side;
  b.dim = dim;
  for (int i = 0; i < dim; ++i) b.corner[i] = corner[i];
  return b;
}

BoxSpec make_box(int side, int dim) {
  const std::array<int, 2> zero{0, 0};
  return make_box(std::span<const int>(zero.data(), static_cast<std::size_t>(dim < 0 ? 0 : std::min(dim, 2))),
                  side, dim);
}

int set_distance(std::span<const Site> a, std::span<const Site> b) {
  int best = std::numeric_limits<int>::max();
  for (const auto& x : a)
    for (const auto& y : b) best = std::min(best, sup_distance(x, y));
  return best;
}

int box_distance(const BoxSpec& a, const BoxSpec& b) {
  // Per-axis interval distance; sup over axes.
  int d = 0;
  for (int i = 0; i < a.dim; ++i) {
    const int alo = a.corner[i], ahi = a.corner[i] + a.side - 1;
    const int blo = b.corner[i], bhi = b.corner[i] + b.side - 1;
    int gap = 0;
    if (bhi < alo) gap = alo - bhi;
    else if (ahi < blo) gap = blo - ahi;
    d = std::max(d, gap);
  }
  return d;
}

std::int64_t Tiling::covered_sites() const {
  std::int64_t c = 0;
  for (const auto& b : sub_boxes) c += b.cardinality();
  return c;
}

namespace {

int ceil_to_multiple(int v, int step) {
  // Least multiple of step that is >= v (works for negative v).
  const int q = v / step;
  int candidate = q * step;
  if (candidate < v) candidate += step;
  return candidate;
}

}  // namespace

Tiling tile(int n, int m, int gap, int step, int dim) {
  if (dim != 1 && dim != 2) throw std::invalid_argument("tile: dim must be 1 or 2");
  if (m < 1 || gap < 0 || step < 1) throw std::invalid_argument("tile: need m >= 1, gap >= 0, step >= 1");
  const int period = m + gap + step;
  if (n < period) throw std::invalid_argument("tile: n < m + g(m) + step, no sub-box fits");

  Tiling t;
  t.outer = make_box(n, dim);
  t.inner_side = m;
  t.gap = gap;
  t.step = step;
  t.per_axis = n / period;
  t.remainder = n - t.per_axis * period;

  const int k = t.per_axis;
  const int ky = dim == 2 ? k : 1;
  for (int qx = 0; qx < k; ++qx) {
    for (int qy = 0; qy < ky; ++qy) {
      // Λ'_q has corner q * period; Λ_q starts at the least sublattice point in it.
      BoxSpec b;
      b.side = m;
      b.dim = dim;
      b.corner[0] = ceil_to_multiple(t.outer.corner[0] + qx * period, step);
      b.corner[1] = dim == 2 ? ceil_to_multiple(t.outer.corner[1] + qy * period, step) : 0;
      t.sub_boxes.push_back(b);
    }
  }

  for (const auto& z : t.outer.sites()) {
    const bool covered = std::any_of(t.sub_boxes.begin(), t.sub_boxes.end(),
                                     [&](const BoxSpec& b) { return b.contains(z); });
    if (!covered) t.margin.push_back(z);
  }
  t.rho = Rational{static_cast<std::int64_t>(t.margin.size()), t.outer.cardinality()};
  return t;
}

IntTable::IntTable(std::vector<std::pair<int, double>> entries) : entries_(std::move(entries)) {
  std::sort(entries_.begin(), entries_.end());
}

IntTable IntTable::constant(double v) {
  return from_function([v](int) { return v; });
}

IntTable IntTable::from_function(std::function<double(int)> f) {
  IntTable t;
  t.fn_ = std::move(f);
  return t;
}

bool IntTable::has(int key) const {
  if (fn_) return true;
  return std::any_of(entries_.begin(), entries_.end(), [&](const auto& e) { return e.first == key; });
}

double IntTable::at(int key) const {
  if (fn_) return fn_(key);
  for (const auto& [k, v] : entries_)
    if (k == key) return v;
  throw std::out_of_range("IntTable: no entry for key " + std::to_string(key));
}

int IntTable::int_at(int key) const {
  const double v = at(key);
  const double r = std::round(v);
  if (std::abs(v - r) > 1e-9) throw std::invalid_argument("IntTable: non-integer value where an integer was required");
  return static_cast<int>(r);
}

RhoLimitReport rho_limit_check(std::span<const int> m_sequence, const IntTable& gap, int step,
                               const std::function<int(int)>& n_of_m, int dim,
                               std::span<const double> thresholds) {
  RhoLimitReport rep;
  rep.thresholds.assign(thresholds.begin(), thresholds.end());
  for (int m : m_sequence) {
    const int g = gap.int_at(m);
    const int n = n_of_m(m);
    const Tiling t = tile(n, m, g, step, dim);
    RhoSample s;
    s.m = m;
    s.n = n;
    s.gap = g;
    s.rho = t.rho;
    s.upper_estimate = dim * (static_cast<double>(g + step) / (m + g + step) +
                              static_cast<double>(t.remainder) / n);
    rep.samples.push_back(s);
  }
  rep.monotone_nonincreasing = true;
  for (std::size_t i = 1; i < rep.samples.size(); ++i)
    if (rep.samples[i].rho.value() > rep.samples[i - 1].rho.value()) rep.monotone_nonincreasing = false;

  rep.pass = !rep.samples.empty();
  for (double thr : thresholds) {
    int from = -1;
    for (int i = static_cast<int>(rep.samples.size()) - 1; i >= 0; --i) {
      if (rep.samples[static_cast<std::size_t>(i)].rho.value() < thr) from = i;
      else break;
    }
    rep.settled_from.push_back(from);
    if (from < 0) rep.pass = false;
  }
  return rep;
}

}  // namespace ldlab

#include "ldlab/convex_duality.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "json.hpp"

namespace ldlab {

namespace {

struct Conj1D {
  std::vector<double> values;
  std::vector<int> argmax;  // -1 when every input value is +inf
};

// max_i lam[i] * x - f[i] for every x of an increasing grid.
Conj1D conjugate_1d(const std::vector<double>& lam, const std::vector<double>& f, const GridAxis& xs) {
  struct Vertex {
    double l, v;
    int i;
  };
  std::vector<Vertex> hull;
  for (std::size_t i = 0; i < lam.size(); ++i) {
    if (f[i] == kInf) continue;
    const Vertex p{lam[i], f[i], static_cast<int>(i)};
    while (hull.size() >= 2) {
      const Vertex& o = hull[hull.size() - 2];
      const Vertex& a = hull.back();
      const double cross = (a.l - o.l) * (p.v - o.v) - (a.v - o.v) * (p.l - o.l);
      if (cross > 0.0) break;
      hull.pop_back();
    }
    hull.push_back(p);
  }
  Conj1D out;
  out.values.assign(static_cast<std::size_t>(xs.points), -kInf);
  out.argmax.assign(static_cast<std::size_t>(xs.points), -1);
  if (hull.empty()) return out;
  std::size_t j = 0;
  for (int b = 0; b < xs.points; ++b) {
    const double x = xs.at(b);
    while (j + 1 < hull.size() && hull[j + 1].l * x - hull[j + 1].v > hull[j].l * x - hull[j].v) ++j;
    out.values[static_cast<std::size_t>(b)] = hull[j].l * x - hull[j].v;
    out.argmax[static_cast<std::size_t>(b)] = hull[j].i;
  }
  return out;
}

std::vector<double> axis_points(const GridAxis& a) {
  std::vector<double> v(static_cast<std::size_t>(a.points));
  for (int i = 0; i < a.points; ++i) v[static_cast<std::size_t>(i)] = a.at(i);
  return v;
}

void require_conjugable(const GridFunction& f, const std::vector<GridAxis>& x_axes) {
  if (static_cast<int>(x_axes.size()) != f.dim()) throw std::invalid_argument("lft: x grid dimension differs from f");
  if (!f.proper()) throw std::invalid_argument("lft: input is not proper: " + f.properness_diagnostic());
}

nlohmann::ordered_json num(double v) {
  if (std::isfinite(v)) return v;
  return format_double(v);
}

nlohmann::ordered_json point_json(const Point& p) {
  if (p.size() == 1) return num(p[0]);
  nlohmann::ordered_json a = nlohmann::ordered_json::array();
  for (double v : p) a.push_back(num(v));
  return a;
}

void require_common_grid(const std::vector<GridFunction>& family, const GridFunction& limit) {
  for (const auto& f : family)
    if (f.axes() != limit.axes()) throw std::invalid_argument("mosco: every function must share the limit's grid");
}

// Flat indices of the grid box of half-width `w` (per axis, in grid points) around `center`.
std::vector<std::size_t> window(const GridFunction& g, std::size_t center, const std::vector<int>& w) {
  const auto c = g.multi_index(center);
  std::vector<std::size_t> out;
  if (g.dim() == 1) {
    const int lo = std::max(0, c[0] - w[0]), hi = std::min(g.axis(0).points - 1, c[0] + w[0]);
    for (int i = lo; i <= hi; ++i) out.push_back(static_cast<std::size_t>(i));
    return out;
  }
  const int lo0 = std::max(0, c[0] - w[0]), hi0 = std::min(g.axis(0).points - 1, c[0] + w[0]);
  const int lo1 = std::max(0, c[1] - w[1]), hi1 = std::min(g.axis(1).points - 1, c[1] + w[1]);
  for (int i = lo0; i <= hi0; ++i)
    for (int j = lo1; j <= hi1; ++j) {
      const int mi[2] = {i, j};
      out.push_back(g.flat_index(mi));
    }
  return out;
}

// Linear shrink factor in [0, 1]: 1 at the tail start, 0 at the last index.
double shrink_factor(const std::vector<int>& indices, std::size_t tail, std::size_t pos) {
  const int m0 = indices[tail], mM = indices.back();
  if (mM == m0) return 0.0;
  return static_cast<double>(mM - indices[pos]) / static_cast<double>(mM - m0);
}

// a - b on extended reals where +inf - +inf counts as satisfied (+inf).
double extended_difference(double a, double b) {
  if (b == kInf) return a == kInf ? kInf : -kInf;
  return a - b;
}

}  // namespace

Conjugate lft(const GridFunction& f, const std::vector<GridAxis>& x_axes) {
  require_conjugable(f, x_axes);
  if (f.dim() == 1) {
    const Conj1D c = conjugate_1d(axis_points(f.axis(0)), f.values(), x_axes[0]);
    Conjugate out{GridFunction(x_axes, c.values), {}};
    for (int i : c.argmax) out.argmax.push_back(static_cast<std::size_t>(i));
    return out;
  }
  const int n0 = f.axis(0).points, n1 = f.axis(1).points;
  const int m0 = x_axes[0].points, m1 = x_axes[1].points;
  const auto lam1 = axis_points(f.axis(1));
  // Row conjugates h_i(x2) = max_j lambda2_j x2 - f(i, j).
  std::vector<Conj1D> rows;
  rows.reserve(static_cast<std::size_t>(n0));
  for (int i = 0; i < n0; ++i) {
    std::vector<double> row(f.values().begin() + static_cast<std::ptrdiff_t>(i) * n1,
                            f.values().begin() + static_cast<std::ptrdiff_t>(i + 1) * n1);
    rows.push_back(conjugate_1d(lam1, row, x_axes[1]));
  }
  const auto lam0 = axis_points(f.axis(0));
  std::vector<double> values(static_cast<std::size_t>(m0) * static_cast<std::size_t>(m1));
  std::vector<std::size_t> argmax(values.size());
  std::vector<double> column(static_cast<std::size_t>(n0));
  for (int b = 0; b < m1; ++b) {
    for (int i = 0; i < n0; ++i) column[static_cast<std::size_t>(i)] = -rows[static_cast<std::size_t>(i)].values[static_cast<std::size_t>(b)];
    const Conj1D c = conjugate_1d(lam0, column, x_axes[0]);
    for (int a = 0; a < m0; ++a) {
      const std::size_t out_idx = static_cast<std::size_t>(a) * static_cast<std::size_t>(m1) + static_cast<std::size_t>(b);
      const int i = c.argmax[static_cast<std::size_t>(a)];
      const int j = rows[static_cast<std::size_t>(i)].argmax[static_cast<std::size_t>(b)];
      values[out_idx] = c.values[static_cast<std::size_t>(a)];
      argmax[out_idx] = static_cast<std::size_t>(i) * static_cast<std::size_t>(n1) + static_cast<std::size_t>(j);
    }
  }
  return {GridFunction(x_axes, std::move(values)), std::move(argmax)};
}

Conjugate lft_direct(const GridFunction& f, const std::vector<GridAxis>& x_axes, std::uint64_t max_pairs) {
  require_conjugable(f, x_axes);
  std::size_t nx = 1;
  for (const auto& a : x_axes) nx *= static_cast<std::size_t>(a.points);
  if (static_cast<std::uint64_t>(nx) * f.size() > max_pairs) throw BudgetExceeded("lft_direct: pair budget exceeded");
  GridFunction xs(x_axes, std::vector<double>(nx, 0.0));
  std::vector<Point> lambdas(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) lambdas[i] = f.point(i);
  Conjugate out{xs, std::vector<std::size_t>(nx, 0)};
  for (std::size_t b = 0; b < nx; ++b) {
    const Point x = xs.point(b);
    double best = -kInf;
    std::size_t arg = 0;
    for (std::size_t i = 0; i < f.size(); ++i) {
      if (f.value(i) == kInf) continue;
      const double v = dot(lambdas[i], x) - f.value(i);
      if (v > best) {
        best = v;
        arg = i;
      }
    }
    out.function.value(b) = best;
    out.argmax[b] = arg;
  }
  return out;
}

double conjugate_at(const GridFunction& f, std::span<const double> x) {
  if (static_cast<int>(x.size()) != f.dim()) throw std::invalid_argument("conjugate_at: dimension mismatch");
  double best = -kInf;
  for (std::size_t i = 0; i < f.size(); ++i)
    if (f.value(i) < kInf) best = std::max(best, dot(f.point(i), x) - f.value(i));
  return best;
}

GridFunction biconjugate(const GridFunction& f, const std::vector<GridAxis>& x_axes) {
  return lft(lft(f, x_axes).function, f.axes()).function;
}

std::size_t tail_start_of(const std::vector<int>& indices) {
  if (indices.empty()) return 0;
  const double half = indices.back() / 2.0;
  for (std::size_t p = 0; p < indices.size(); ++p)
    if (indices[p] >= half) return p;
  return indices.size() - 1;
}

PropernessWitness uniform_properness_check(const std::vector<GridFunction>& family) {
  PropernessWitness w;
  if (family.empty()) {
    w.diagnostic = "empty family";
    return w;
  }
  const GridFunction& g0 = family.front();
  const Point origin(static_cast<std::size_t>(g0.dim()), 0.0);
  const std::size_t zero = g0.nearest(origin);
  const Point zp = g0.point(zero);
  bool at_zero = std::all_of(zp.begin(), zp.end(), [](double v) { return std::abs(v) < 1e-12; });
  for (const auto& f : family) at_zero = at_zero && std::abs(f.value(zero)) <= 1e-12;
  if (at_zero) {
    w.found = true;
    w.point = zp;
    w.sup_value = -kInf;
    for (const auto& f : family) w.sup_value = std::max(w.sup_value, f.value(zero));
    return w;
  }
  double best = kInf;
  std::size_t arg = 0;
  for (std::size_t i = 0; i < g0.size(); ++i) {
    double worst = -kInf;
    for (const auto& f : family) worst = std::max(worst, f.value(i));
    if (worst < best) {
      best = worst;
      arg = i;
    }
  }
  if (best < kInf) {
    w.found = true;
    w.point = g0.point(arg);
    w.sup_value = best;
    return w;
  }
  w.diagnostic = "no grid point keeps every f_m finite;";
  for (std::size_t m = 0; m < family.size(); ++m)
    if (!family[m].proper()) w.diagnostic += " member " + std::to_string(m) + ": " + family[m].properness_diagnostic() + ";";
  return w;
}

std::vector<M2Entry> mosco_m2_check(const std::vector<GridFunction>& family, const std::vector<int>& indices,
                                    const GridFunction& limit, const MoscoOptions& options) {
  if (family.size() != indices.size() || family.empty()) throw std::invalid_argument("mosco_m2_check: family/index size mismatch");
  require_common_grid(family, limit);
  const std::size_t tail = tail_start_of(indices);
  std::vector<M2Entry> out;
  for (std::size_t i = 0; i < limit.size(); ++i) {
    M2Entry e;
    e.index = i;
    e.lambda = limit.point(i);
    e.f_value = limit.value(i);
    e.margin = kInf;
    e.raw_margin = kInf;
    for (std::size_t p = tail; p < family.size(); ++p) {
      const int w = static_cast<int>(std::lround(options.m2_window * shrink_factor(indices, tail, p)));
      const auto cells = window(limit, i, std::vector<int>(static_cast<std::size_t>(limit.dim()), w));
      const GridFunction& fm = family[p];
      double best = kInf;
      std::size_t arg = cells.front();
      for (std::size_t c : cells) {
        e.margin = std::min(e.margin, extended_difference(fm.value(c), limit.value(c)));
        if (fm.value(c) < best) {
          best = fm.value(c);
          arg = c;
        }
      }
      e.witness.push_back(limit.point(arg));
      e.raw_margin = std::min(e.raw_margin, extended_difference(fm.value(arg), e.f_value));
    }
    out.push_back(std::move(e));
  }
  return out;
}

std::vector<M1Entry> mosco_m1_check(const std::vector<GridFunction>& family, const std::vector<int>& indices,
                                    const GridFunction& limit, const std::vector<GridAxis>& x_axes,
                                    const MoscoOptions& options) {
  if (family.size() != indices.size() || family.empty()) throw std::invalid_argument("mosco_m1_check: family/index size mismatch");
  require_common_grid(family, limit);
  const Conjugate target = lft(limit, x_axes);
  std::vector<GridFunction> conj;
  conj.reserve(family.size());
  for (const auto& f : family) conj.push_back(lft(f, x_axes).function);
  const std::size_t tail = tail_start_of(indices);
  double r0 = options.m1_radius;
  if (r0 < 0.0) {
    r0 = 0.0;
    for (const auto& a : x_axes) r0 = std::max(r0, 0.25 * (a.hi - a.lo));
  }
  std::vector<M1Entry> out;
  const GridFunction& fx = target.function;
  for (std::size_t b = 0; b < fx.size(); ++b) {
    M1Entry e;
    e.index = b;
    e.x = fx.point(b);
    e.target = fx.value(b);
    const auto lam = limit.multi_index(target.argmax[b]);
    e.interior = true;
    for (int j = 0; j < limit.dim(); ++j)
      e.interior = e.interior && lam[static_cast<std::size_t>(j)] > 0 && lam[static_cast<std::size_t>(j)] < limit.axis(j).points - 1;
    e.tail_max = -kInf;
    for (std::size_t p = tail; p < family.size(); ++p) {
      const double r = r0 * shrink_factor(indices, tail, p);
      std::vector<int> w;
      for (const auto& a : x_axes) w.push_back(a.points > 1 ? static_cast<int>(std::floor(r / a.step() + 1e-9)) : 0);
      const auto cells = window(fx, b, w);
      double best = kInf;
      std::size_t arg = cells.front();
      for (std::size_t c : cells)
        if (conj[p].value(c) < best) {
          best = conj[p].value(c);
          arg = c;
        }
      e.witness.push_back(fx.point(arg));
      e.tail_max = std::max(e.tail_max, best);
    }
    e.slack = e.tail_max - e.target;
    out.push_back(std::move(e));
  }
  return out;
}

MoscoReport mosco_report(const std::vector<GridFunction>& family, const std::vector<int>& indices,
                         const GridFunction& limit, const std::vector<GridAxis>& x_axes, const MoscoOptions& options) {
  MoscoReport r;
  r.indices = indices;
  r.options = options;
  r.tail_start = tail_start_of(indices);
  r.properness = uniform_properness_check(family);
  r.properness_status = r.properness.found ? Status::Pass : Status::Fail;
  if (!limit.proper()) {
    r.notes.push_back("limit function is not proper: " + limit.properness_diagnostic());
    r.status = Status::Fail;
    return r;
  }
  r.m2 = mosco_m2_check(family, indices, limit, options);
  r.worst_m2_margin = kInf;
  for (const auto& e : r.m2) r.worst_m2_margin = std::min(r.worst_m2_margin, e.margin);
  r.m2_status = r.worst_m2_margin >= -options.m2_tolerance ? Status::Pass : Status::Fail;

  bool proper_members = std::all_of(family.begin(), family.end(), [](const GridFunction& f) { return f.proper(); });
  if (proper_members) {
    r.m1 = mosco_m1_check(family, indices, limit, x_axes, options);
    r.worst_m1_slack = -kInf;
    int interior = 0;
    for (const auto& e : r.m1)
      if (e.interior) {
        ++interior;
        r.worst_m1_slack = std::max(r.worst_m1_slack, e.slack);
      }
    if (interior == 0) {
      r.m1_status = Status::Inconclusive;
      r.notes.push_back("no interior x on the grid; M1 not assessed");
    } else {
      r.m1_status = r.worst_m1_slack <= options.m1_tolerance ? Status::Pass : Status::Fail;
    }
  } else {
    r.m1_status = Status::Fail;
    r.notes.push_back("some f_m is not proper; conjugates undefined");
  }
  r.notes.push_back("tail suffix: m in [" + std::to_string(indices[r.tail_start]) + ", " + std::to_string(indices.back()) +
                    "], " + std::to_string(indices.size() - r.tail_start) + " indices");
  r.status = combine(r.properness_status, combine(r.m2_status, r.m1_status));
  return r;
}

std::string MoscoReport::to_json() const {
  using nlohmann::ordered_json;
  ordered_json j;
  j["schema_version"] = kReportSchemaVersion;
  j["report"] = "mosco";
  j["status"] = to_string(status);
  j["indices"] = indices;
  j["tail"] = {{"from", indices.empty() ? 0 : indices[tail_start]},
               {"to", indices.empty() ? 0 : indices.back()},
               {"length", indices.size() - tail_start}};
  j["options"] = {{"m2_tolerance", num(options.m2_tolerance)},
                  {"m1_tolerance", num(options.m1_tolerance)},
                  {"m2_window", options.m2_window},
                  {"m1_radius", num(options.m1_radius)}};
  j["uniform_properness"] = {{"status", to_string(properness_status)},
                             {"found", properness.found},
                             {"witness", properness.found ? point_json(properness.point) : ordered_json()},
                             {"sup_value", num(properness.sup_value)},
                             {"diagnostic", properness.diagnostic}};
  ordered_json m2j = ordered_json::array();
  for (const auto& e : m2) {
    ordered_json w = ordered_json::array();
    for (const auto& p : e.witness) w.push_back(point_json(p));
    m2j.push_back({{"lambda", point_json(e.lambda)},
                   {"f", num(e.f_value)},
                   {"margin", num(e.margin)},
                   {"raw_margin", num(e.raw_margin)},
                   {"witness", std::move(w)}});
  }
  j["m2"] = {{"status", to_string(m2_status)}, {"worst_margin", num(worst_m2_margin)}, {"entries", std::move(m2j)}};
  ordered_json m1j = ordered_json::array();
  for (const auto& e : m1) {
    ordered_json w = ordered_json::array();
    for (const auto& p : e.witness) w.push_back(point_json(p));
    m1j.push_back({{"x", point_json(e.x)},
                   {"interior", e.interior},
                   {"target", num(e.target)},
                   {"tail_max", num(e.tail_max)},
                   {"slack", num(e.slack)},
                   {"witness", std::move(w)}});
  }
  j["m1"] = {{"status", to_string(m1_status)}, {"worst_slack", num(worst_m1_slack)}, {"entries", std::move(m1j)}};
  j["notes"] = notes;
  return j.dump(2);
}

}  // namespace ldlab

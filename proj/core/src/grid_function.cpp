#include "ldlab/grid_function.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "ldlab/numeric.hpp"

namespace ldlab {

double GridAxis::at(int i) const {
  if (points == 1) return lo;
  if (i == points - 1) return hi;
  return lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(points - 1);
}

int GridAxis::nearest(double v) const {
  if (points == 1) return 0;
  const double t = (v - lo) / step();
  return static_cast<int>(std::clamp<double>(std::round(t), 0.0, points - 1.0));
}

GridAxis symmetric_axis(double half_width, int points) { return {-half_width, half_width, points}; }

GridFunction::GridFunction(std::vector<GridAxis> axes, std::vector<double> values)
    : axes_(std::move(axes)), values_(std::move(values)) {
  if (axes_.empty() || axes_.size() > 2) throw std::invalid_argument("GridFunction: dimension must be 1 or 2");
  std::size_t n = 1;
  for (const auto& a : axes_) {
    if (a.points < 1) throw std::invalid_argument("GridFunction: axis needs at least one point");
    if (a.points > 1 && !(a.hi > a.lo)) throw std::invalid_argument("GridFunction: axis must be strictly increasing");
    n *= static_cast<std::size_t>(a.points);
  }
  if (values_.size() != n) throw std::invalid_argument("GridFunction: value count does not match the grid");
}

GridFunction GridFunction::tabulate(std::vector<GridAxis> axes, const std::function<double(std::span<const double>)>& f) {
  std::size_t n = 1;
  for (const auto& a : axes) n *= static_cast<std::size_t>(std::max(a.points, 0));
  GridFunction g(std::move(axes), std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) g.values_[i] = f(g.point(i));
  return g;
}

std::vector<int> GridFunction::multi_index(std::size_t index) const {
  if (dim() == 1) return {static_cast<int>(index)};
  const auto n1 = static_cast<std::size_t>(axes_[1].points);
  return {static_cast<int>(index / n1), static_cast<int>(index % n1)};
}

std::size_t GridFunction::flat_index(std::span<const int> multi) const {
  if (dim() == 1) return static_cast<std::size_t>(multi[0]);
  return static_cast<std::size_t>(multi[0]) * static_cast<std::size_t>(axes_[1].points) + static_cast<std::size_t>(multi[1]);
}

Point GridFunction::point(std::size_t index) const {
  const auto mi = multi_index(index);
  Point p(axes_.size());
  for (std::size_t j = 0; j < axes_.size(); ++j) p[j] = axes_[j].at(mi[j]);
  return p;
}

std::size_t GridFunction::nearest(std::span<const double> p) const {
  std::vector<int> mi(axes_.size());
  for (std::size_t j = 0; j < axes_.size(); ++j) mi[j] = axes_[j].nearest(p[j]);
  return flat_index(mi);
}

bool GridFunction::proper() const { return properness_diagnostic().empty(); }

std::string GridFunction::properness_diagnostic() const {
  bool finite = false;
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (std::isnan(values_[i])) return "value at grid index " + std::to_string(i) + " is NaN";
    if (values_[i] == -kInf) return "value at grid index " + std::to_string(i) + " is -inf";
    finite = finite || std::isfinite(values_[i]);
  }
  if (!finite) return "no finite value on the grid (function is identically +inf)";
  return {};
}

namespace {

// Calls visit_line(flat indices, step) once per grid line.
template <class F>
void for_each_line(const GridFunction& f, F&& visit_line) {
  if (f.dim() == 1) {
    std::vector<std::size_t> line(f.size());
    for (std::size_t i = 0; i < f.size(); ++i) line[i] = i;
    visit_line(line, f.axis(0).step());
    return;
  }
  const int n0 = f.axis(0).points, n1 = f.axis(1).points;
  for (int i = 0; i < n0; ++i) {
    std::vector<std::size_t> line;
    for (int j = 0; j < n1; ++j) line.push_back(static_cast<std::size_t>(i) * static_cast<std::size_t>(n1) + static_cast<std::size_t>(j));
    visit_line(line, f.axis(1).step());
  }
  for (int j = 0; j < n1; ++j) {
    std::vector<std::size_t> line;
    for (int i = 0; i < n0; ++i) line.push_back(static_cast<std::size_t>(i) * static_cast<std::size_t>(n1) + static_cast<std::size_t>(j));
    visit_line(line, f.axis(0).step());
  }
}

}  // namespace

double GridFunction::max_finite_slope() const {
  double slope = 0.0;
  for_each_line(*this, [&](const std::vector<std::size_t>& line, double h) {
    for (std::size_t i = 1; i < line.size(); ++i) {
      const double a = values_[line[i - 1]], b = values_[line[i]];
      if (std::isfinite(a) && std::isfinite(b)) slope = std::max(slope, std::abs(b - a) / h);
    }
  });
  return slope;
}

double GridFunction::convexity_violation() const {
  double worst = 0.0;
  for_each_line(*this, [&](const std::vector<std::size_t>& line, double) {
    for (std::size_t i = 1; i + 1 < line.size(); ++i) {
      const double a = values_[line[i - 1]], b = values_[line[i]], c = values_[line[i + 1]];
      if (b == kInf && a < kInf && c < kInf) {
        worst = kInf;
        continue;
      }
      if (!std::isfinite(a) || !std::isfinite(b) || !std::isfinite(c)) continue;
      worst = std::max(worst, b - 0.5 * (a + c));
    }
  });
  return worst;
}

void GridFunction::write_csv(std::ostream& os, const std::string& name) const {
  if (dim() == 1)
    os << name << ",value\n";
  else
    os << name << "_1," << name << "_2,value\n";
  for (std::size_t i = 0; i < values_.size(); ++i) {
    for (double c : point(i)) os << format_double(c) << ',';
    os << format_double(values_[i]) << '\n';
  }
}

namespace {

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream is(line);
  while (std::getline(is, cell, ',')) {
    const auto b = cell.find_first_not_of(" \t\r");
    const auto e = cell.find_last_not_of(" \t\r");
    out.push_back(b == std::string::npos ? std::string{} : cell.substr(b, e - b + 1));
  }
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parse_cell(const std::string& s, int line_no) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size() || std::isnan(v))
    throw std::invalid_argument("grid csv line " + std::to_string(line_no) + ": cannot parse number '" + s + "'");
  return v;
}

GridAxis axis_from_unique(std::vector<double> u, const char* what) {
  std::sort(u.begin(), u.end());
  u.erase(std::unique(u.begin(), u.end()), u.end());
  GridAxis a{u.front(), u.back(), static_cast<int>(u.size())};
  const double tol = 1e-9 * std::max(1.0, a.hi - a.lo);
  for (int i = 0; i < a.points; ++i)
    if (std::abs(u[static_cast<std::size_t>(i)] - a.at(i)) > tol)
      throw std::invalid_argument(std::string("grid csv: ") + what + " coordinates are not a uniform grid");
  return a;
}

}  // namespace

GridFunction GridFunction::read_csv(std::istream& is) {
  std::string line;
  int line_no = 0;
  std::vector<std::string> header;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    header = split_csv(line);
    break;
  }
  std::size_t k = header.size() >= 2 ? header.size() - 1 : 0;
  for (std::size_t j = 0; j < header.size(); ++j)
    if (header[j] == "value") {
      k = j;
      break;
    }
  if (k != 1 && k != 2)
    throw std::invalid_argument("grid csv: expected 1 or 2 coordinate columns before the value column");
  std::vector<std::vector<double>> rows;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto cells = split_csv(line);
    if (cells.size() != header.size())
      throw std::invalid_argument("grid csv line " + std::to_string(line_no) + ": expected " +
                                  std::to_string(header.size()) + " columns");
    std::vector<double> r;
    for (std::size_t j = 0; j <= k; ++j) r.push_back(parse_cell(cells[j], line_no));
    for (std::size_t j = 0; j < k; ++j)
      if (!std::isfinite(r[j]))
        throw std::invalid_argument("grid csv line " + std::to_string(line_no) + ": coordinates must be finite");
    rows.push_back(std::move(r));
  }
  if (rows.empty()) throw std::invalid_argument("grid csv: no data rows");

  std::vector<GridAxis> axes;
  for (std::size_t j = 0; j < k; ++j) {
    std::vector<double> u;
    for (const auto& r : rows) u.push_back(r[j]);
    axes.push_back(axis_from_unique(std::move(u), j == 0 ? "first" : "second"));
  }
  std::size_t n = 1;
  for (const auto& a : axes) n *= static_cast<std::size_t>(a.points);
  if (n != rows.size()) throw std::invalid_argument("grid csv: rows do not form a full product grid");
  std::vector<double> values(n);
  std::vector<bool> seen(n, false);
  for (const auto& r : rows) {
    std::vector<int> mi(k);
    for (std::size_t j = 0; j < k; ++j) mi[j] = axes[j].nearest(r[j]);
    const std::size_t idx = k == 1 ? static_cast<std::size_t>(mi[0])
                                   : static_cast<std::size_t>(mi[0]) * static_cast<std::size_t>(axes[1].points) +
                                         static_cast<std::size_t>(mi[1]);
    if (seen[idx]) throw std::invalid_argument("grid csv: duplicate grid point");
    seen[idx] = true;
    values[idx] = r[k];
  }
  return GridFunction(std::move(axes), std::move(values));
}

}  // namespace ldlab

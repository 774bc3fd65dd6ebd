#include <cmath>
#include <sstream>

#include "doctest.h"
#include "ldlab/numeric.hpp"
#include "ldlab/pressure.hpp"

using namespace ldlab;

namespace {

FieldModel rademacher() { return FieldModel::iid(scalar_values({-1.0, 1.0}), {0.5, 0.5}); }
FieldModel biased3() { return FieldModel::iid(scalar_values({-1.0, 0.0, 2.0}), {0.5, 0.3, 0.2}); }
FieldModel chain() { return FieldModel::markov(scalar_values({-1.0, 1.0}), {{0.7, 0.3}, {0.4, 0.6}}); }

/// (1/n) log E exp(lambda * sum) by enumerating every path of the chain.
double enumerated_pressure(const FieldModel& model, int n, double lambda) {
  const BlockLaw law = restriction_law(model, make_box(n, 1));
  double acc = 0.0;
  for (std::size_t i = 0; i < law.configs.size(); ++i) {
    double s = 0.0;
    for (int a : law.configs[i]) s += model.values().atoms[static_cast<std::size_t>(a)][0];
    acc += law.probs[i] * std::exp(lambda * s);
  }
  return std::log(acc) / n;
}

/// log of the larger eigenvalue of the 2x2 matrix P(a, b) e^{lambda y_b}.
double two_state_pressure(const Matrix& p, double y0, double y1, double lambda) {
  const double a = p[0][0] * std::exp(lambda * y0), b = p[0][1] * std::exp(lambda * y1);
  const double c = p[1][0] * std::exp(lambda * y0), d = p[1][1] * std::exp(lambda * y1);
  const double tr = a + d, det = a * d - b * c;
  return std::log(0.5 * (tr + std::sqrt(tr * tr - 4.0 * det)));
}

std::vector<Point> grid_points(double half, int points) {
  std::vector<Point> out;
  for (double v : uniform_grid(-half, half, points)) out.push_back({v});
  return out;
}

}  // namespace

TEST_CASE("i.i.d. pressure is the log moment generating function at every volume") {
  for (double l : {-5.0, -1.3, 0.0, 0.25, 5.0}) {
    const Point lambda{l};
    CHECK(pressure_limit(rademacher(), lambda) == doctest::Approx(std::log(std::cosh(l))).epsilon(1e-13));
    const double mgf = std::log(0.5 * std::exp(-l) + 0.3 + 0.2 * std::exp(2.0 * l));
    CHECK(pressure_limit(biased3(), lambda) == doctest::Approx(mgf).epsilon(1e-13));
    for (int n : {1, 7, 40}) CHECK(pressure_finite(biased3(), n, lambda) == doctest::Approx(mgf).epsilon(1e-12));
  }
}

TEST_CASE("Markov pressure: Perron root against the 2x2 closed form") {
  const FieldModel mc = chain();
  for (double l : {-5.0, -0.7, 0.0, 1.1, 5.0}) {
    const Point lambda{l};
    CHECK(pressure_limit(mc, lambda) == doctest::Approx(two_state_pressure(mc.transition(), -1.0, 1.0, l)).epsilon(1e-10));
  }
}

TEST_CASE("finite-volume Markov pressure against path enumeration and the mean law") {
  const FieldModel mc = chain();
  for (double l : {-2.0, 0.3, 1.5}) {
    const Point lambda{l};
    for (int n : {1, 5, 12}) {
      const double direct = enumerated_pressure(mc, n, l);
      CHECK(pressure_finite(mc, n, lambda) == doctest::Approx(direct).epsilon(1e-11));
      CHECK(pressure_finite_mean_law(mc, n, lambda) == doctest::Approx(direct).epsilon(1e-11));
    }
  }
}

TEST_CASE("finite-volume pressure converges to the limit for the chain") {
  const FieldModel mc = chain();
  const Point lambda{0.8};
  const double limit = pressure_limit(mc, lambda);
  double prev = kInf;
  for (int n : {10, 100, 1000}) {
    const double gap = std::abs(pressure_finite(mc, n, lambda) - limit);
    CHECK(gap < prev);
    prev = gap;
  }
  CHECK(prev < 1e-3);
}

TEST_CASE("pressure vanishes at zero and is convex on the grid") {
  const std::vector<FieldModel> models{rademacher(), biased3(), chain(), product_of_marginals(chain(), 2),
                                       conditioned(biased3(), 2, {0, 1})};
  for (const auto& m : models) {
    CAPTURE(m.describe());
    const Point zero{0.0};
    CHECK(std::abs(pressure_limit(m, zero)) < 1e-12);
    CHECK(std::abs(pressure_finite(m, 6, zero)) < 1e-12);
    const PressureCurve c = pressure_curve_finite(m, 6, {symmetric_axis(5.0, 201)});
    CHECK(pressure_convexity_violation(c) < 1e-9);
    const PressureCurve lim = pressure_curve_limit(m, {symmetric_axis(5.0, 201)});
    CHECK(pressure_convexity_violation(lim) < 1e-9);
  }
}

TEST_CASE("two-dimensional values: pressure on a product grid") {
  ValueSpace plane;
  plane.dim = 2;
  plane.atoms = {{1.0, 0.0}, {0.0, 1.0}, {-1.0, -1.0}};
  const FieldModel m = FieldModel::iid(plane, {0.2, 0.3, 0.5}, 2);
  const Point l{0.4, -1.2};
  const double mgf = std::log(0.2 * std::exp(0.4) + 0.3 * std::exp(-1.2) + 0.5 * std::exp(0.8));
  CHECK(pressure_limit(m, l) == doctest::Approx(mgf).epsilon(1e-13));
  CHECK(pressure_finite(m, 3, l) == doctest::Approx(mgf).epsilon(1e-12));
  const PressureCurve c = pressure_curve_limit(m, {symmetric_axis(2.0, 21), symmetric_axis(2.0, 21)});
  CHECK(c.values.size() == 441);
  CHECK(pressure_convexity_violation(c) < 1e-9);
}

TEST_CASE("block pressure identity for product and conditioned models") {
  const auto lambdas = grid_points(5.0, 201);
  for (int j : {1, 2, 3}) {
    for (const auto& m : {product_of_marginals(chain(), j), conditioned(biased3(), j, {0, 2})}) {
      CAPTURE(m.describe());
      const VerificationReport rep = block_pressure_identity_check(m, lambdas, {2, 3}, 1e-10);
      CHECK(rep.status == Status::Pass);
      CHECK(rep.worst_slack >= -1e-10);
    }
  }
  CHECK_THROWS_AS(block_pressure_identity_check(chain(), lambdas), std::invalid_argument);
}

TEST_CASE("conditioned block pressure without enumeration") {
  const FieldModel b3 = biased3();
  const FieldModel mc = chain();
  for (double l : {-3.0, 0.5, 4.0}) {
    const Point lambda{l};
    CHECK(conditioned_block_pressure(b3, 3, {0, 1}, lambda) ==
          doctest::Approx(pressure_limit(conditioned(b3, 3, {0, 1}), lambda)).epsilon(1e-12));
    CHECK(conditioned_block_pressure(mc, 4, {1}, lambda) ==
          doctest::Approx(pressure_limit(conditioned(mc, 4, {1}), lambda)).epsilon(1e-12));
    CHECK(conditioned_block_pressure(mc, 4, {0, 1}, lambda) ==
          doctest::Approx(pressure_finite(mc, 4, lambda)).epsilon(1e-12));
  }
}

TEST_CASE("log Perron root reports non-convergence") {
  const Matrix m{{2.0, 1.0}, {1.0, 3.0}};
  CHECK(log_perron_root(m) == doctest::Approx(std::log(0.5 * (5.0 + std::sqrt(5.0)))).epsilon(1e-12));
  CHECK_THROWS_AS(log_perron_root(m, 0.0, 3), ConvergenceError);
}

TEST_CASE("pressure subadditivity inequality with measured slack") {
  const auto lambdas = grid_points(5.0, 11);
  for (const auto& m : {rademacher(), chain()}) {
    for (int mm : {2, 4, 8})
      for (int n : {32, 64, 128})
        for (const auto& l : lambdas) {
          const auto params = scalar_field_params(m, l, mm);
          const VerificationReport rep = pressure_subadditivity_check(m, l, mm, n, params, 1e-9);
          CAPTURE(rep.records.front().label);
          CHECK(rep.status == Status::Pass);
        }
  }
}

TEST_CASE("scalar field parameters of <lambda, sigma>") {
  const auto p = scalar_field_params(rademacher(), Point{2.0}, 4);
  CHECK(p.gap == 0);
  CHECK(p.cost == 0.0);
  CHECK(p.alpha == 1.0);
  CHECK(p.t == doctest::Approx(2.0).epsilon(1e-8));
  const auto z = scalar_field_params(rademacher(), Point{0.0}, 4);
  CHECK(z.alpha == 1.0);
  CHECK(z.t < 1e-9);
}

TEST_CASE("residual beta lemma on scalar projections") {
  for (const auto& m : {biased3(), chain(), product_of_marginals(chain(), 2)}) {
    for (double l : {-2.0, 0.5, 3.0}) {
      const auto params = scalar_field_params(m, Point{l}, 1);
      const FieldModel scalar = affine_image(m, AffineMap::linear_functional({l}));
      EventCheckOptions o;
      o.events = 30;
      o.seed = 9;
      const VerificationReport rep = residual_beta_check(scalar, {{1, 0}, {2, 0}, {4, 0}}, params.t, params.alpha, o);
      CHECK(rep.status == Status::Pass);
    }
  }
}

TEST_CASE("Monte Carlo pressure interval covers the exact value") {
  const PressureValue v = pressure_finite_mc(biased3(), 10, Point{0.5}, 20000, 17);
  const double exact = pressure_finite(biased3(), 10, Point{0.5});
  CHECK(v.mode == PressureMode::MonteCarlo);
  CHECK(v.ci_low <= exact);
  CHECK(exact <= v.ci_high);
  const PressureValue w = pressure_finite_mc(biased3(), 10, Point{0.5}, 20000, 17);
  CHECK(v.value == w.value);
}

TEST_CASE("pressure curve CSV columns") {
  const PressureCurve c = pressure_curve_finite(chain(), 4, {symmetric_axis(1.0, 3)});
  std::ostringstream os;
  c.write_csv(os);
  const std::string s = os.str();
  CHECK(s.rfind("lambda,value,mode,ci_low,ci_high\n", 0) == 0);
  CHECK(s.find("transfer-matrix") != std::string::npos);
}

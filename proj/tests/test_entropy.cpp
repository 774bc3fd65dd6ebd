#include <cmath>
#include <sstream>

#include "doctest.h"
#include "ldlab/convex_duality.hpp"
#include "ldlab/entropy_ldp.hpp"
#include "ldlab/numeric.hpp"
#include "ldlab/pressure.hpp"

using namespace ldlab;

namespace {

FieldModel rademacher() { return FieldModel::iid(scalar_values({-1.0, 1.0}), {0.5, 0.5}); }
FieldModel chain() { return FieldModel::markov(scalar_values({-1.0, 1.0}), {{0.7, 0.3}, {0.4, 0.6}}); }

/// (1/n) log P(|mean - x| < r) for n fair signs, summed term by term.
double binomial_entropy(int n, double x, double r) {
  double acc = -kInf;
  for (int k = 0; k <= n; ++k) {
    const double mean = (2.0 * k - n) / n;
    if (std::abs(mean - x) >= r * (1.0 - kBoundaryGuard)) continue;
    const double lp = std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0) - n * std::log(2.0);
    acc = log_add_exp(acc, lp);
  }
  return acc / n;
}

double cramer(double x) { return 0.5 * ((1 + x) * std::log1p(x) + (1 - x) * std::log1p(-x)); }

}  // namespace

TEST_CASE("Rademacher entropy against the binomial sum") {
  const std::vector<int> volumes{10, 40, 160, 400};
  for (double x : {-0.6, 0.0, 0.3}) {
    for (double r : {0.1, 0.05}) {
      const EntropyEstimate e = entropy_estimate(rademacher(), {x}, ConvexShape::interval(r), volumes);
      REQUIRE(e.values.size() == volumes.size());
      for (std::size_t i = 0; i < volumes.size(); ++i) {
        const double oracle = binomial_entropy(volumes[i], x, r);
        if (oracle == -kInf)
          CHECK(e.values[i] == -kInf);
        else
          CHECK(e.values[i] == doctest::Approx(oracle).epsilon(1e-11));
      }
      CHECK(e.s_est == e.values.back());
      CHECK(e.mode == EvalMode::Exact);
    }
  }
}

TEST_CASE("entropy approaches minus the rate on the neighbourhood") {
  const EntropyEstimate e = entropy_estimate(rademacher(), {0.3}, ConvexShape::interval(0.1), {100, 200, 400});
  // The closest point of (0.2, 0.4) to the mean 0 is 0.2.
  CHECK(std::abs(e.s_est + cramer(0.2)) < 0.02);
  CHECK(e.tail_oscillation >= 0.0);
  CHECK(e.liminf_proxy <= e.s_est);
}

TEST_CASE("entropy outside the support is minus infinity") {
  const EntropyEstimate e = entropy_estimate(rademacher(), {2.0}, ConvexShape::interval(0.5), {4, 8});
  CHECK(e.minus_infinity);
  CHECK(e.s_est == -kInf);
  CHECK(e.tail_oscillation == 0.0);
  CHECK_THROWS_AS(entropy_estimate(rademacher(), {0.0}, ConvexShape::interval(0.5), {8, 4}), std::invalid_argument);
}

TEST_CASE("Monte Carlo entropy is reproducible and close to the exact value") {
  const std::vector<int> volumes{10, 20};
  const EntropyEstimate a = entropy_estimate_mc(chain(), {0.0}, ConvexShape::interval(0.25), volumes, 20000, 3);
  const EntropyEstimate b = entropy_estimate_mc(chain(), {0.0}, ConvexShape::interval(0.25), volumes, 20000, 3);
  CHECK(a.values == b.values);
  CHECK(a.mode == EvalMode::MonteCarlo);
  const EntropyEstimate exact = entropy_estimate(chain(), {0.0}, ConvexShape::interval(0.25), volumes);
  for (std::size_t i = 0; i < volumes.size(); ++i) CHECK(std::abs(a.values[i] - exact.values[i]) < 4.0 * a.std_errors[i] + 1e-9);
}

TEST_CASE("tiling parameters use the field translated to the target point") {
  const TilingParams p = tiling_params(rademacher(), {0.3}, ConvexShape::interval(0.1), 4);
  CHECK(p.gap == 0);
  CHECK(p.cost == 0.0);
  CHECK(p.alpha == 1.0);
  // The farthest atom from 0.3 is -1, at gauge 1.3 / 0.1.
  CHECK(p.t == doctest::Approx(13.0).epsilon(1e-6));
  CHECK(p.t > 13.0);
  const TilingParams q = tiling_params(chain(), {0.0}, ConvexShape::interval(0.5), 4);
  CHECK(q.gap == 1);
  CHECK(q.cost == doctest::Approx(-2.0 * std::log(0.3)));
}

TEST_CASE("subadditive inequality: exact tilings pass and recover the block oracle") {
  for (int m : {2, 4, 5}) {
    const FieldModel model = rademacher();
    MeanLawCache laws(model);
    const ConvexNbhd c{{0.0}, ConvexShape::interval(0.5), 0.0};
    const int n = 12 * m;
    const TilingParams params = tiling_params(rademacher(), c.center, c.shape, m);
    const VerificationReport rep = subadditive_lemma_check(laws, c, 0.5, 0.05, m, n, params);
    CHECK(rep.status == Status::Pass);
    REQUIRE(rep.records.size() == 2);
    CHECK(rep.records[0].lhs == doctest::Approx(binomial_entropy(n, 0.0, 0.5)).epsilon(1e-11));
    CHECK(rep.records[0].rhs == doctest::Approx(binomial_entropy(m, 0.0, 0.25)).epsilon(1e-11));
  }
}

TEST_CASE("subadditive inequality never fails when the premise holds") {
  const std::vector<FieldModel> models{rademacher(), chain(), product_of_marginals(chain(), 2)};
  for (const auto& model : models) {
    MeanLawCache laws(model);
    for (double y : {-0.4, 0.0, 0.2})
      for (int m : {2, 3, 6})
        for (int n : {40, 80, 120}) {
          const ConvexNbhd c{{y}, ConvexShape::interval(0.5), 0.0};
          const TilingParams params = tiling_params(model, c.center, c.shape, m);
          const VerificationReport rep = subadditive_lemma_check(laws, c, 0.6, 0.1, m, n, params);
          for (const auto& r : rep.records) {
            CAPTURE(r.label);
            if (r.premise_holds) CHECK(r.status == Status::Pass);
          }
          CHECK(rep.status != Status::Fail);
        }
  }
}

TEST_CASE("finite-volume concavity") {
  const FieldModel signs = rademacher();
  const FieldModel mc = chain();
  MeanLawCache laws(signs);
  const ConvexShape v = ConvexShape::interval(0.3);
  const TilingParams params = tiling_params(signs, {0.0}, v, 4);
  const VerificationReport rep = concavity_check(laws, {-0.4}, {0.4}, v, 0.3, 4, 64, params);
  CHECK(rep.status == Status::Pass);
  MeanLawCache mc_laws(mc);
  for (int n : {50, 100}) {
    const TilingParams mp = tiling_params(mc, {0.0}, v, 3);
    CHECK(concavity_check(mc_laws, {-0.2}, {0.4}, v, 0.4, 3, n, mp).status != Status::Fail);
  }
}

TEST_CASE("Chebyshev grid bound dominates the exact probability") {
  const std::vector<GridAxis> axes{symmetric_axis(5.0, 201)};
  for (const auto& model : {rademacher(), chain()}) {
    MeanLawCache laws(model);
    for (double y : {-0.5, 0.1, 0.6})
      for (int n : {10, 50, 200}) {
        const ConvexNbhd a{{y}, ConvexShape::interval(0.15), 0.0};
        CHECK(chebyshev_upper_check(laws, a, n, axes).status == Status::Pass);
      }
  }
}

TEST_CASE("upper bound check: true estimates pass, an inflated one fails") {
  const GridFunction p = GridFunction::tabulate({symmetric_axis(5.0, 201)},
                                                [](std::span<const double> l) { return std::log(std::cosh(l[0])); });
  const double h = p.axis(0).step();
  std::vector<EntropyEstimate> est;
  for (double x : {-0.6, 0.0, 0.3})
    est.push_back(entropy_estimate(rademacher(), {x}, ConvexShape::interval(0.1), {50, 100, 200}));
  CHECK(upper_bound_check(est, p, 3.0 * h, "rademacher").status == Status::Pass);
  EntropyEstimate fake = est.back();
  fake.values.back() = 0.0;
  CHECK(upper_bound_check({fake}, p, 0.0, "rademacher").status == Status::Fail);
}

TEST_CASE("entropy CSV columns") {
  const EntropyEstimate e = entropy_estimate(rademacher(), {0.0}, ConvexShape::interval(0.1), {4, 8});
  std::ostringstream os;
  write_entropy_csv(os, {e});
  CHECK(os.str() == "x,radius,n,log_prob_over_volume,mode\n0,0.10000000000000001,4," + format_double(e.values[0]) +
                        ",exact\n0,0.10000000000000001,8," + format_double(e.values[1]) + ",exact\n");
}

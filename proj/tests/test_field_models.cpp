#include <cmath>
#include <map>

#include "doctest.h"
#include "ldlab/field_model.hpp"
#include "ldlab/numeric.hpp"

using namespace ldlab;

namespace {

FieldModel rademacher() { return FieldModel::iid(scalar_values({-1.0, 1.0}), {0.5, 0.5}); }
FieldModel chain() { return FieldModel::markov(scalar_values({-1.0, 1.0}), {{0.7, 0.3}, {0.4, 0.6}}); }

double path_probability(const FieldModel& mc, const std::vector<int>& path) {
  double p = mc.stationary()[static_cast<std::size_t>(path[0])];
  for (std::size_t i = 1; i < path.size(); ++i)
    p *= mc.transition()[static_cast<std::size_t>(path[i - 1])][static_cast<std::size_t>(path[i])];
  return p;
}

double law_probability(const BlockLaw& law, const std::vector<int>& cfg) {
  for (std::size_t i = 0; i < law.configs.size(); ++i)
    if (law.configs[i] == cfg) return law.probs[i];
  return 0.0;
}

/// Pearson statistic of observed counts against expected probabilities.
double chi_square(const std::vector<int>& counts, const std::vector<double>& probs) {
  double total = 0.0;
  for (int c : counts) total += c;
  double chi = 0.0;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    const double e = total * probs[i];
    chi += (counts[i] - e) * (counts[i] - e) / e;
  }
  return chi;
}

}  // namespace

TEST_CASE("model construction validates its inputs") {
  CHECK_THROWS_AS(FieldModel::iid(scalar_values({0.0, 0.0}), {0.5, 0.5}), std::invalid_argument);
  CHECK_THROWS_AS(FieldModel::iid(scalar_values({0.0, 1.0}), {0.5, 0.6}), std::invalid_argument);
  CHECK_THROWS_AS(FieldModel::iid(scalar_values({0.0, 1.0}), {1.0}), std::invalid_argument);
  CHECK_THROWS_AS(FieldModel::markov(scalar_values({0.0, 1.0}), {{1.0, 0.0}, {0.5, 0.5}}), std::invalid_argument);
  CHECK_THROWS_AS(FieldModel::iid(scalar_values({0.0, 1.0}), {0.5, 0.5}, 3), std::invalid_argument);
}

TEST_CASE("two-state chain: stationary law and Doeblin certificate") {
  const FieldModel mc = chain();
  // pi P = pi for P = [[0.7, 0.3], [0.4, 0.6]] gives pi = (4/7, 3/7).
  CHECK(mc.stationary()[0] == doctest::Approx(4.0 / 7.0).epsilon(1e-14));
  CHECK(mc.stationary()[1] == doctest::Approx(3.0 / 7.0).epsilon(1e-14));
  const DoeblinCertificate c = doeblin_certificate(mc);
  CHECK(c.delta == doctest::Approx(0.3));
  CHECK(c.kappa == doctest::Approx(0.5));
  CHECK(c.cost == doctest::Approx(-2.0 * std::log(0.3)));
  CHECK(c.sharp_cost <= c.cost);
  CHECK(c.gap == 1);
  CHECK(mc.params().decoupling.gap.int_at(5) == 1);
  CHECK(mc.params().decoupling.cost.at(5) == doctest::Approx(c.cost));
}

TEST_CASE("restriction laws match path and product probabilities") {
  const FieldModel mc = chain();
  const BlockLaw law = restriction_law(mc, make_box(4, 1));
  CHECK(law.configs.size() == 16);
  double total = 0.0;
  for (std::size_t i = 0; i < law.configs.size(); ++i) {
    CHECK(law.probs[i] == doctest::Approx(path_probability(mc, law.configs[i])).epsilon(1e-13));
    total += law.probs[i];
  }
  CHECK(total == doctest::Approx(1.0).epsilon(1e-14));

  const FieldModel biased = FieldModel::iid(scalar_values({-1.0, 0.0, 2.0}), {0.5, 0.3, 0.2}, 2);
  const BlockLaw law2 = restriction_law(biased, make_box(2, 2));
  CHECK(law2.configs.size() == 81);
  for (std::size_t i = 0; i < law2.configs.size(); ++i) {
    double p = 1.0;
    for (int a : law2.configs[i]) p *= biased.weights()[static_cast<std::size_t>(a)];
    CHECK(law2.probs[i] == doctest::Approx(p).epsilon(1e-13));
  }
  CHECK_THROWS_AS(restriction_law(biased, make_box(5, 2), 1000), BudgetExceeded);
}

TEST_CASE("product of marginals: blocks are independent copies of the base restriction") {
  const FieldModel mc = chain();
  const FieldModel prod = product_of_marginals(mc, 2);
  CHECK(prod.step() == 2);
  CHECK(prod.block_side() == 2);
  CHECK(prod.kind() == FieldModel::Kind::ProductOfMarginals);
  const BlockLaw block = restriction_law(mc, make_box(2, 1));
  const BlockLaw four = restriction_law(prod, make_box(4, 1));
  for (std::size_t i = 0; i < four.configs.size(); ++i) {
    const auto& c = four.configs[i];
    const double expect = law_probability(block, {c[0], c[1]}) * law_probability(block, {c[2], c[3]});
    CHECK(four.probs[i] == doctest::Approx(expect).epsilon(1e-13));
  }
  const auto w = prod.site_marginal({1, 0});
  CHECK(w[0] == doctest::Approx(4.0 / 7.0));
}

TEST_CASE("conditioned block law renormalises the allowed configurations") {
  const FieldModel biased = FieldModel::iid(scalar_values({-1.0, 0.0, 2.0}), {0.5, 0.3, 0.2});
  const FieldModel cond = conditioned(biased, 2, {0, 1});
  const double mass = 0.8 * 0.8;
  CHECK(conditioning_mass(biased, 2, {0, 1}) == doctest::Approx(mass).epsilon(1e-14));
  const BlockLaw& law = cond.block_law();
  CHECK(law.configs.size() == 4);
  for (std::size_t i = 0; i < law.configs.size(); ++i) {
    double p = 1.0;
    for (int a : law.configs[i]) p *= biased.weights()[static_cast<std::size_t>(a)];
    CHECK(law.probs[i] == doctest::Approx(p / mass).epsilon(1e-13));
  }
  CHECK_THROWS_AS(conditioned(biased, 2, {}), std::domain_error);
  CHECK_THROWS_AS(conditioned(biased, 2, {3}), std::invalid_argument);
  const FieldModel mc = chain();
  CHECK(conditioning_mass(mc, 3, {1}) == doctest::Approx(3.0 / 7.0 * 0.6 * 0.6).epsilon(1e-13));
}

TEST_CASE("affine images map atoms and shift local control") {
  const FieldModel r = rademacher();
  const FieldModel scaled = affine_image(r, AffineMap::scaling(2.0));
  CHECK(scaled.values().atoms[0][0] == -2.0);
  CHECK(scaled.values().atoms[1][0] == 2.0);
  const FieldModel shifted = affine_image(r, AffineMap::translation({1.0}));
  CHECK(shifted.values().atoms[0][0] == 0.0);
  CHECK(shifted.values().atoms[1][0] == 2.0);

  const ConvexShape v = ConvexShape::interval(1.0);
  const double t0 = r.params().local_control(v.as_gauge()).t;
  const double ts = scaled.params().local_control(v.as_gauge()).t;
  const double tt = shifted.params().local_control(v.as_gauge()).t;
  CHECK(t0 == doctest::Approx(1.0).epsilon(1e-8));
  // The scaled field needs twice the scale, the shifted one t(V) + M_V(-1).
  CHECK(ts == doctest::Approx(2.0).epsilon(1e-8));
  CHECK(tt == doctest::Approx(2.0).epsilon(1e-8));

  ValueSpace plane;
  plane.dim = 2;
  plane.atoms = {{1.0, 0.0}, {0.0, 1.0}, {1.0, 1.0}};
  const FieldModel two = FieldModel::iid(plane, {0.2, 0.3, 0.5});
  const FieldModel proj = affine_image(two, AffineMap::linear_functional({1.0, 1.0}));
  CHECK(proj.value_dim() == 1);
  CHECK(proj.values().atoms[2][0] == 2.0);
  CHECK_THROWS_AS(affine_image(two, AffineMap::linear_functional({1.0})), std::invalid_argument);
  CHECK_THROWS_AS(affine_image(r, AffineMap::scaling(0.0)), std::invalid_argument);
}

TEST_CASE("sure-event local control covers every atom with alpha = 1") {
  const FieldModel biased = FieldModel::iid(scalar_values({-1.0, 0.0, 2.0}), {0.5, 0.3, 0.2});
  const ConvexShape v = ConvexShape::interval(0.5);
  const LocalControlEntry e = biased.params().local_control(v.as_gauge());
  CHECK(e.alpha == 1.0);
  for (const auto& a : biased.values().atoms) CHECK(v.gauge(a) < e.t);
}

TEST_CASE("Doeblin local control: alpha is kappa times the minorising mass inside tV") {
  const FieldModel mc = chain();
  const LocalControlRule rule = doeblin_local_control(mc, 1.5);
  const LocalControlEntry e = rule(ConvexShape::interval(1.0).as_gauge());
  CHECK(e.t == 1.5);
  CHECK(e.alpha == doctest::Approx(0.5 * (0.4 + 0.3)));
  const LocalControlEntry small = rule(ConvexShape::interval(0.5).as_gauge());
  CHECK(small.alpha == 0.0);
}

TEST_CASE("sampling is a pure function of the seed and matches the law") {
  const FieldModel biased = FieldModel::iid(scalar_values({-1.0, 0.0, 2.0}), {0.5, 0.3, 0.2});
  const BoxSpec box = make_box(20000, 1);
  const Configuration a = sample(biased, box, 42);
  const Configuration b = sample(biased, box, 42);
  CHECK(a.atoms == b.atoms);
  CHECK(a.atoms != sample(biased, box, 43).atoms);
  std::vector<int> counts(3, 0);
  for (int x : a.atoms) ++counts[static_cast<std::size_t>(x)];
  // 2 degrees of freedom; 13.82 is the 0.999 quantile.
  CHECK(chi_square(counts, biased.weights()) < 13.82);

  const FieldModel mc = chain();
  const Configuration path = sample(mc, box, 7);
  std::vector<int> from0(2, 0), from1(2, 0);
  for (std::size_t i = 1; i < path.atoms.size(); ++i)
    (path.atoms[i - 1] == 0 ? from0 : from1)[static_cast<std::size_t>(path.atoms[i])]++;
  // One degree of freedom each; 10.83 is the 0.999 quantile.
  CHECK(chi_square(from0, mc.transition()[0]) < 10.83);
  CHECK(chi_square(from1, mc.transition()[1]) < 10.83);

  const FieldModel prod = product_of_marginals(mc, 2);
  const Configuration blocks = sample(prod, make_box(4000, 1), 3);
  std::map<std::pair<int, int>, int> pairs;
  for (std::size_t i = 0; i + 1 < blocks.atoms.size(); i += 2) ++pairs[{blocks.atoms[i], blocks.atoms[i + 1]}];
  std::vector<int> obs;
  std::vector<double> expect;
  const BlockLaw law = restriction_law(mc, make_box(2, 1));
  for (std::size_t i = 0; i < law.configs.size(); ++i) {
    obs.push_back(pairs[{law.configs[i][0], law.configs[i][1]}]);
    expect.push_back(law.probs[i]);
  }
  // 3 degrees of freedom; 16.27 is the 0.999 quantile.
  CHECK(chi_square(obs, expect) < 16.27);
}

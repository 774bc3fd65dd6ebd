#include <cmath>
#include <random>

#include "doctest.h"
#include "json.hpp"
#include "ldlab/convex_duality.hpp"
#include "ldlab/numeric.hpp"

using namespace ldlab;

namespace {

struct Brute {
  std::vector<double> values;
  std::vector<std::size_t> argmax;
};

/// Independent oracle: a plain double loop over grid points, first maximiser wins.
Brute brute_conjugate(const GridFunction& f, const GridFunction& xs) {
  Brute out;
  for (std::size_t b = 0; b < xs.size(); ++b) {
    const Point x = xs.point(b);
    double best = -kInf;
    std::size_t arg = 0;
    for (std::size_t i = 0; i < f.size(); ++i) {
      if (f.value(i) == kInf) continue;
      const Point l = f.point(i);
      double v = -f.value(i);
      for (std::size_t j = 0; j < x.size(); ++j) v += l[j] * x[j];
      if (v > best) {
        best = v;
        arg = i;
      }
    }
    out.values.push_back(best);
    out.argmax.push_back(arg);
  }
  return out;
}

GridFunction random_function(std::mt19937_64& rng, const std::vector<GridAxis>& axes, double inf_fraction) {
  std::uniform_real_distribution<double> u(-3.0, 3.0), coin(0.0, 1.0);
  GridFunction f = GridFunction::tabulate(axes, [&](std::span<const double>) { return u(rng); });
  for (std::size_t i = 0; i < f.size(); ++i)
    if (coin(rng) < inf_fraction) f.value(i) = kInf;
  if (!f.proper()) f.value(0) = 0.0;
  return f;
}

GridFunction shifted(const GridFunction& f, double c) {
  GridFunction g = f;
  for (std::size_t i = 0; i < g.size(); ++i) g.value(i) += c;
  return g;
}

GridFunction half_square(const GridAxis& a) {
  return GridFunction::tabulate({a}, [](std::span<const double> l) { return 0.5 * l[0] * l[0]; });
}

}  // namespace

TEST_CASE("lft matches the brute-force conjugate in one dimension") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 100; ++trial) {
    const GridAxis la{-2.0, 3.0, 2 + trial % 40};
    const GridAxis xa{-4.0, 1.5, 1 + (trial * 7) % 50};
    const GridFunction f = random_function(rng, {la}, trial % 3 == 0 ? 0.3 : 0.0);
    const Conjugate c = lft(f, {xa});
    const Brute b = brute_conjugate(f, c.function);
    for (std::size_t i = 0; i < b.values.size(); ++i) {
      CHECK(c.function.value(i) == doctest::Approx(b.values[i]).epsilon(1e-12));
      CHECK(c.argmax[i] == b.argmax[i]);
    }
    const Conjugate d = lft_direct(f, {xa});
    CHECK(d.function.values() == b.values);
    CHECK(d.argmax == b.argmax);
  }
}

TEST_CASE("lft matches the brute-force conjugate in two dimensions") {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 40; ++trial) {
    const std::vector<GridAxis> la{{-1.0, 2.0, 3 + trial % 7}, {-2.0, 2.0, 2 + trial % 5}};
    const std::vector<GridAxis> xa{{-3.0, 3.0, 4 + trial % 6}, {-1.0, 4.0, 3 + trial % 8}};
    const GridFunction f = random_function(rng, la, trial % 2 == 0 ? 0.25 : 0.0);
    const Conjugate c = lft(f, xa);
    const Brute b = brute_conjugate(f, c.function);
    for (std::size_t i = 0; i < b.values.size(); ++i) {
      CHECK(c.function.value(i) == doctest::Approx(b.values[i]).epsilon(1e-12));
      CHECK(c.argmax[i] == b.argmax[i]);
    }
  }
}

TEST_CASE("conjugate of lambda^2 / 2 is x^2 / 2 up to the grid error") {
  const GridAxis la = symmetric_axis(5.0, 201);
  const double h = la.step();
  const Conjugate c = lft(half_square(la), {GridAxis{-5.0, 5.0, 333}});
  for (std::size_t i = 0; i < c.function.size(); ++i) {
    const double x = c.function.point(i)[0];
    CHECK(c.function.value(i) <= 0.5 * x * x + 1e-12);
    CHECK(c.function.value(i) >= 0.5 * x * x - h * h / 8.0 - 1e-12);
  }
}

TEST_CASE("Fenchel-Young holds for every grid pair") {
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 20; ++trial) {
    const GridFunction f = random_function(rng, {GridAxis{-2.0, 2.0, 31}}, 0.2);
    const Conjugate c = lft(f, {GridAxis{-3.0, 3.0, 41}});
    for (std::size_t i = 0; i < f.size(); ++i) {
      if (f.value(i) == kInf) continue;
      for (std::size_t b = 0; b < c.function.size(); ++b)
        CHECK(f.value(i) + c.function.value(b) >= f.point(i)[0] * c.function.point(b)[0] - 1e-12);
    }
  }
}

TEST_CASE("biconjugate: equal for convex input, a convex minorant otherwise") {
  const GridAxis la = symmetric_axis(5.0, 201);
  const GridAxis slopes{-4.975, 4.975, 200};
  const GridFunction f = half_square(la);
  const GridFunction ff = biconjugate(f, {slopes});
  for (std::size_t i = 0; i < f.size(); ++i) CHECK(ff.value(i) == doctest::Approx(f.value(i)).epsilon(1e-10));

  std::mt19937_64 rng(10);
  for (int trial = 0; trial < 20; ++trial) {
    const GridFunction g = random_function(rng, {GridAxis{-1.0, 1.0, 21}}, 0.0);
    const GridFunction gg = biconjugate(g, {GridAxis{-200.0, 200.0, 4001}});
    CHECK(gg.convexity_violation() < 1e-9);
    for (std::size_t i = 0; i < g.size(); ++i) CHECK(gg.value(i) <= g.value(i) + 1e-9);
  }
}

TEST_CASE("conjugation reverses order") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> bump(0.0, 1.0);
  for (int pair = 0; pair < 50; ++pair) {
    const std::vector<GridAxis> la = pair % 2 ? std::vector<GridAxis>{symmetric_axis(2.0, 25)}
                                              : std::vector<GridAxis>{symmetric_axis(2.0, 9), symmetric_axis(1.0, 7)};
    const std::vector<GridAxis> xa = pair % 2 ? std::vector<GridAxis>{symmetric_axis(3.0, 31)}
                                              : std::vector<GridAxis>{symmetric_axis(3.0, 11), symmetric_axis(3.0, 13)};
    const GridFunction f = random_function(rng, la, 0.0);
    GridFunction g = f;
    for (std::size_t i = 0; i < g.size(); ++i) g.value(i) += bump(rng);
    const GridFunction fs = lft(f, xa).function, gs = lft(g, xa).function;
    for (std::size_t b = 0; b < fs.size(); ++b) CHECK(gs.value(b) <= fs.value(b));
  }
}

TEST_CASE("ties go to the smallest lambda") {
  const GridFunction flat({GridAxis{-1.0, 1.0, 3}}, {0.0, 0.0, 0.0});
  const Conjugate c = lft(flat, {GridAxis{0.0, 0.0, 1}});
  CHECK(c.function.value(0) == 0.0);
  CHECK(c.argmax[0] == 0);
  const GridFunction vee({GridAxis{-1.0, 1.0, 3}}, {1.0, 0.0, 1.0});
  const Conjugate v = lft(vee, {GridAxis{-1.0, 1.0, 3}});
  CHECK(v.argmax == std::vector<std::size_t>{0, 1, 1});
  const GridFunction flat2({GridAxis{-1.0, 1.0, 3}, GridAxis{-1.0, 1.0, 3}}, std::vector<double>(9, 0.0));
  const Conjugate c2 = lft(flat2, {GridAxis{0.0, 0.0, 1}, GridAxis{0.0, 0.0, 1}});
  CHECK(c2.argmax[0] == 0);
}

TEST_CASE("improper inputs and mismatched grids are rejected") {
  const GridAxis a{0.0, 1.0, 3};
  CHECK_THROWS_AS(lft(GridFunction({a}, {0.0, -kInf, 0.0}), {a}), std::invalid_argument);
  CHECK_THROWS_AS(lft(GridFunction({a}, {kInf, kInf, kInf}), {a}), std::invalid_argument);
  CHECK_THROWS_AS(lft(GridFunction({a}, {0.0, 0.0, 0.0}), {a, a}), std::invalid_argument);
  CHECK_THROWS_AS(lft_direct(GridFunction({a}, {0.0, 0.0, 0.0}), {GridAxis{0.0, 1.0, 100}}, 10), BudgetExceeded);
  CHECK(lft(GridFunction({a}, {kInf, 2.0, kInf}), {a}).function.value(2) == doctest::Approx(-1.5));
}

TEST_CASE("conjugate at arbitrary points agrees with the grid transform") {
  std::mt19937_64 rng(12);
  const GridFunction f = random_function(rng, {symmetric_axis(2.0, 17)}, 0.1);
  const Conjugate c = lft(f, {symmetric_axis(4.0, 21)});
  for (std::size_t b = 0; b < c.function.size(); ++b)
    CHECK(conjugate_at(f, c.function.point(b)) == doctest::Approx(c.function.value(b)).epsilon(1e-12));
}

TEST_CASE("tail of the index sequence") {
  CHECK(tail_start_of({1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12}) == 5);
  CHECK(tail_start_of({2, 4, 8, 16}) == 2);
  CHECK(tail_start_of({5}) == 0);
}

TEST_CASE("Mosco: a constant family converges to itself") {
  const GridAxis la = symmetric_axis(3.0, 61);
  const GridFunction f = half_square(la);
  const std::vector<int> idx{1, 2, 3, 4, 5, 6, 7, 8};
  const std::vector<GridFunction> fam(idx.size(), f);
  const MoscoReport r = mosco_report(fam, idx, f, {symmetric_axis(2.0, 41)});
  CHECK(r.status == Status::Pass);
  CHECK(r.properness.found);
  CHECK(r.properness.point == Point{0.0});
  CHECK(r.worst_m2_margin == 0.0);
  CHECK(r.worst_m1_slack == doctest::Approx(0.0).epsilon(1e-12));
  const auto j = nlohmann::json::parse(r.to_json());
  CHECK(j["schema_version"] == "1.0");
  CHECK(j["status"] == "pass");
  CHECK(j["tail"]["from"] == 4);
}

TEST_CASE("Mosco: decreasing offsets pass, a downward shift fails M2") {
  const GridAxis la = symmetric_axis(3.0, 61);
  const GridFunction f = half_square(la);
  std::vector<int> idx;
  std::vector<GridFunction> up, down;
  for (int m = 1; m <= 10; ++m) {
    idx.push_back(m);
    up.push_back(shifted(f, 1.0 / m));
    down.push_back(shifted(f, -0.1));
  }
  const MoscoReport ok = mosco_report(up, idx, f, {symmetric_axis(2.0, 41)});
  CHECK(ok.m2_status == Status::Pass);
  CHECK(ok.m1_status == Status::Pass);
  CHECK(ok.worst_m1_slack <= -0.1 + 1e-12);
  CHECK(ok.properness.point == Point{0.0});
  const MoscoReport bad = mosco_report(down, idx, f, {symmetric_axis(2.0, 41)});
  CHECK(bad.m2_status == Status::Fail);
  CHECK(bad.worst_m2_margin == doctest::Approx(-0.1));
  CHECK(bad.status == Status::Fail);
}

TEST_CASE("Mosco: properness witness away from the origin and its failure") {
  const GridAxis la = symmetric_axis(1.0, 5);
  const GridFunction f({la}, {kInf, 1.0, 2.0, kInf, kInf});
  const std::vector<int> idx{1, 2};
  const PropernessWitness w = uniform_properness_check({f, shifted(f, 0.5)});
  CHECK(w.found);
  CHECK(w.point == Point{-0.5});
  CHECK(w.sup_value == 1.5);
  const GridFunction top({la}, std::vector<double>(5, kInf));
  const PropernessWitness none = uniform_properness_check({top, f});
  CHECK_FALSE(none.found);
  CHECK(none.diagnostic.find("member 0") != std::string::npos);
  const MoscoReport r = mosco_report({top, top}, idx, f, {la});
  CHECK(r.properness_status == Status::Fail);
  CHECK(r.status == Status::Fail);
}

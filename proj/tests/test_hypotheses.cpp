#include <cmath>

#include "doctest.h"
#include "ldlab/hypotheses.hpp"
#include "ldlab/numeric.hpp"

using namespace ldlab;

namespace {

FieldModel chain() { return FieldModel::markov(scalar_values({-1.0, 1.0}), {{0.7, 0.3}, {0.4, 0.6}}); }
FieldModel biased3() { return FieldModel::iid(scalar_values({-1.0, 0.0, 2.0}), {0.5, 0.3, 0.2}); }

EventCheckOptions opts(std::uint64_t seed, int events = 200) {
  EventCheckOptions o;
  o.events = events;
  o.seed = seed;
  return o;
}

}  // namespace

TEST_CASE("i.i.d. decoupling holds with zero slack in exact mode") {
  const FieldModel r = FieldModel::iid(scalar_values({-1.0, 1.0}), {0.5, 0.5});
  const VerificationReport rep = check_decoupling(r, 4, opts(1));
  CHECK(rep.status == Status::Pass);
  CHECK(rep.event_count == 200);
  for (const auto& rec : rep.records) CHECK(std::abs(rec.slack) <= 1e-12);
}

TEST_CASE("Doeblin chain decouples with the certified cost and gap") {
  const VerificationReport rep = check_decoupling(chain(), 5, opts(2));
  CHECK(rep.status == Status::Pass);
  CHECK(rep.worst_slack >= 0.0);
}

TEST_CASE("decoupling with zero cost is rejected for a sticky chain") {
  const FieldModel sticky = FieldModel::markov(scalar_values({-1.0, 1.0}), {{0.95, 0.05}, {0.05, 0.95}});
  const VerificationReport rep = check_decoupling(sticky, 3, 0, 0.0, opts(3));
  CHECK(rep.status == Status::Fail);
  CHECK(rep.worst_slack < 0.0);
}

TEST_CASE("local control: sure-event rule passes, an overclaimed alpha fails") {
  const ConvexShape v = ConvexShape::interval(0.5);
  CHECK(check_local_control(biased3(), v, opts(4)).status == Status::Pass);
  const FieldModel mc = chain();
  const VerificationReport ok = check_local_control(mc, ConvexShape::interval(1.0), 1.5, 0.35, opts(5));
  CHECK(ok.status == Status::Pass);
  // With t V = (-0.75, 0.75) no atom fits, so any alpha > 0 is false.
  const VerificationReport bad = check_local_control(mc, ConvexShape::interval(1.0), 0.75, 0.1, opts(6));
  CHECK(bad.status == Status::Fail);
}

TEST_CASE("product and conditioned models keep the base parameters") {
  const FieldModel mc = chain();
  const FieldModel b3 = biased3();
  const std::vector<FieldModel> models{product_of_marginals(mc, 2), product_of_marginals(b3, 3), conditioned(mc, 2, {0, 1}),
                                       conditioned(b3, 2, {0, 2})};
  std::uint64_t seed = 10;
  for (const auto& m : models) {
    CAPTURE(m.describe());
    const VerificationReport dec = check_decoupling(m, 4, opts(seed++));
    CHECK(dec.status == Status::Pass);
    CHECK(dec.event_count == 200);
    const VerificationReport lc = check_local_control(m, ConvexShape::interval(0.8), opts(seed++));
    CHECK(lc.status == Status::Pass);
    CHECK(lc.event_count == 200);
  }
}

TEST_CASE("Monte Carlo mode agrees within three standard errors") {
  EventCheckOptions o = opts(21, 40);
  o.mode = EvalMode::MonteCarlo;
  o.mc_samples = 4000;
  const VerificationReport rep = check_decoupling(chain(), 3, o);
  CHECK(rep.status != Status::Fail);
  CHECK(rep.mode == "mc");
}

TEST_CASE("verifier output is reproducible") {
  const VerificationReport a = check_decoupling(chain(), 4, opts(33, 50));
  const VerificationReport b = check_decoupling(chain(), 4, opts(33, 50));
  CHECK(a.to_json() == b.to_json());
}

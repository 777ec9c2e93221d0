#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "iffl/equilibrium.hpp"
#include "iffl/errors.hpp"
#include "iffl/integrate.hpp"
#include "iffl/model.hpp"
#include "test_params.hpp"

using namespace iffl;

namespace {

Jacobian2 fd_jacobian(const ModelParams& params, double p, double y) {
  const double hp = 1e-6 * std::max(1.0, std::fabs(p));
  const double hy = 1e-6 * std::max(1.0, std::fabs(y));
  auto dp = [&](double pp, double yy) {
    return rhs_reduced(params, ReducedState{pp, yy}).dp;
  };
  auto dy = [&](double pp, double yy) {
    return rhs_reduced(params, ReducedState{pp, yy}).dy;
  };
  Jacobian2 j;
  j.j11 = (dp(p + hp, y) - dp(p - hp, y)) / (2 * hp);
  j.j12 = (dp(p, y + hy) - dp(p, y - hy)) / (2 * hy);
  j.j21 = (dy(p + hp, y) - dy(p - hp, y)) / (2 * hp);
  j.j22 = (dy(p, y + hy) - dy(p, y - hy)) / (2 * hy);
  return j;
}

}  // namespace

TEST_SUITE("equilibrium") {

TEST_CASE("stability classification from trace and determinant") {
  CHECK(classify_stability(Jacobian2{-1, 0, 0, -2}) ==
        Stability::StableNodeFocus);
  CHECK(classify_stability(Jacobian2{1, 0, 0, 2}) == Stability::Unstable);
  CHECK(classify_stability(Jacobian2{-1, 0, 0, 2}) == Stability::Saddle);
  CHECK(classify_stability(Jacobian2{0, -1, 1, 0}) == Stability::Degenerate);
  CHECK(classify_stability(Jacobian2{-1, 0, 0, 0}) == Stability::Degenerate);
}

TEST_CASE("linear closed form at the benchmark point") {
  EquilibriumReport r = closed_loop_equilibrium_linear(baseline_loop());
  CHECK(r.p_bar == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
  CHECK(r.y_bar == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
  CHECK(r.mu == doctest::Approx(-1.0 / 3.0).epsilon(1e-15));
  CHECK(r.jacobian.trace() < 0.0);
  CHECK(r.jacobian.det() > 0.0);
  CHECK(r.stability == Stability::StableNodeFocus);
  CHECK(r.outcome == Outcome::Elimination);
  CHECK(r.source == EquilibriumSource::ClosedForm);

  ModelParams washout = baseline_loop();
  washout.lambda = -2.0;  // a + lambda < 0: only the origin remains
  EquilibriumReport o = closed_loop_equilibrium_linear(washout);
  CHECK(o.p_bar == 0.0);
  CHECK(o.y_bar == 0.0);
  CHECK(o.mu == doctest::Approx(-2.0).epsilon(1e-15));
  CHECK(o.outcome == Outcome::Elimination);

  ModelParams ac = four_band_params(1.0);
  CHECK_THROWS_AS(closed_loop_equilibrium_linear(ac), ValidationError);
}

TEST_CASE("origin report") {
  ModelParams p = baseline_loop();  // a + lambda = 2 > 0
  EquilibriumReport r = origin_report(p);
  CHECK(r.p_bar == 0.0);
  CHECK(r.y_bar == 0.0);
  CHECK(r.stability == Stability::Saddle);
  CHECK(r.jacobian.j12 == 0.0);
  // exact product, no cancellation
  CHECK(r.jacobian.det() == -(p.delta * (p.a + p.lambda)));

  ModelParams q = baseline_loop();
  q.lambda = -2.0;
  EquilibriumReport s = origin_report(q);
  CHECK(s.stability == Stability::StableNodeFocus);
  CHECK(s.mu == doctest::Approx(-2.0).epsilon(1e-15));
}

TEST_CASE("growth exponent closed form") {
  CHECK(solve_mu(baseline_loop()) == doctest::Approx(-1.0 / 3.0).epsilon(1e-15));

  // balanced numerator: exactly marginal
  ModelParams bal;
  bal.kappa = 1.0;
  bal.lambda = 1.0;
  CHECK(solve_mu(bal) == doctest::Approx(0.0));
  CHECK(outcome_from_mu(solve_mu(bal)) == Outcome::Marginal);

  // washout regime returns lambda itself
  ModelParams w;
  w.lambda = -5.0;
  CHECK(solve_mu(w) == doctest::Approx(-5.0).epsilon(1e-15));

  ModelParams ac = four_band_params(1.0);
  CHECK_THROWS_AS(solve_mu(ac), ValidationError);
}

TEST_CASE("outcome from the growth exponent") {
  CHECK(outcome_from_mu(0.5) == Outcome::Proliferation);
  CHECK(outcome_from_mu(-0.5) == Outcome::Elimination);
  CHECK(outcome_from_mu(0.0) == Outcome::Marginal);
  CHECK(outcome_from_mu(1e-12) == Outcome::Marginal);
  CHECK(outcome_from_mu(1e-6, 1e-9) == Outcome::Proliferation);
}

TEST_CASE("autocatalytic root scan reproduces reference roots") {
  // digits from a 40-digit bisection/Newton reference
  struct Expect {
    double lambda, y_bar, p_bar, mu;
  };
  const Expect table[] = {
      {1.0, 0.062531742571386333, 0.54936514857227334, -0.25063485142772666},
      {5.0, 0.22452936814689288, 1.3094126370621424, 0.50941263706214242},
      {25.0, 1.2584135117121759, 0.63172976575648246, -0.16827023424351754},
      {30.0, 1.4712721736226699, 1.3745565275466012, 0.57455652754660123},
  };
  for (const Expect& e : table) {
    std::vector<EquilibriumReport> reps =
        equilibria_autocat(four_band_params(e.lambda));
    REQUIRE(reps.size() == 1);
    CHECK(reps[0].y_bar == doctest::Approx(e.y_bar).epsilon(1e-9));
    CHECK(reps[0].p_bar == doctest::Approx(e.p_bar).epsilon(1e-9));
    CHECK(reps[0].mu == doctest::Approx(e.mu).epsilon(1e-9));
    CHECK(reps[0].source == EquilibriumSource::RootScan);
    CHECK(reps[0].stability == Stability::StableNodeFocus);
  }

  // trace/det spot check at lambda = 25
  std::vector<EquilibriumReport> reps =
      equilibria_autocat(four_band_params(25.0));
  CHECK(reps[0].jacobian.trace() ==
        doctest::Approx(-0.89647831).epsilon(1e-6));
  CHECK(reps[0].jacobian.det() == doctest::Approx(1.4307091).epsilon(1e-6));
}

TEST_CASE("root scan with V = 0 matches the closed form") {
  std::mt19937 rng(7u);
  std::uniform_real_distribution<double> unit(0.3, 3.0);
  for (int i = 0; i < 10; ++i) {
    ModelParams p;
    p.a = unit(rng);
    p.b = unit(rng);
    p.c = unit(rng);
    p.delta = unit(rng);
    p.kappa = unit(rng);
    p.lambda = unit(rng);
    std::vector<EquilibriumReport> reps = equilibria_autocat(p);
    REQUIRE(reps.size() == 1);
    EquilibriumReport cf = closed_loop_equilibrium_linear(p);
    CHECK(reps[0].y_bar == doctest::Approx(cf.y_bar).epsilon(1e-10));
    CHECK(reps[0].p_bar == doctest::Approx(cf.p_bar).epsilon(1e-10));
    CHECK(reps[0].mu == doctest::Approx(cf.mu).epsilon(1e-10));
  }
}

TEST_CASE("two interior roots are both found and classified") {
  std::vector<EquilibriumReport> reps = equilibria_autocat(two_root_params());
  REQUIRE(reps.size() == 2);
  CHECK(reps[0].y_bar == doctest::Approx(0.34407007349952274).epsilon(1e-9));
  CHECK(reps[0].mu ==
        doctest::Approx(0.021778977950143178).epsilon(1e-8));
  CHECK(reps[0].stability == Stability::Unstable);
  CHECK(reps[1].y_bar == doctest::Approx(0.58603937557710291).epsilon(1e-9));
  CHECK(reps[1].mu ==
        doctest::Approx(-0.050811812673130872).epsilon(1e-8));
  CHECK(reps[1].stability == Stability::Saddle);
  CHECK(reps[1].jacobian.det() < 0.0);
}

TEST_CASE("full equilibrium listing includes the origin") {
  std::vector<EquilibriumReport> reps =
      closed_loop_equilibria(baseline_loop());
  REQUIRE(reps.size() == 2);
  bool has_origin = false, has_interior = false;
  for (const EquilibriumReport& r : reps) {
    if (r.p_bar == 0.0 && r.y_bar == 0.0) has_origin = true;
    if (r.p_bar > 0.0) has_interior = true;
  }
  CHECK(has_origin);
  CHECK(has_interior);

  ModelParams washout = baseline_loop();
  washout.lambda = -3.0;
  std::vector<EquilibriumReport> only_origin =
      closed_loop_equilibria(washout);
  REQUIRE(only_origin.size() == 1);
  CHECK(only_origin[0].p_bar == 0.0);
  CHECK(only_origin[0].stability == Stability::StableNodeFocus);
}

TEST_CASE("analytic jacobian agrees with central differences") {
  std::mt19937 rng(4242u);
  std::uniform_real_distribution<double> unit(0.05, 4.0);
  for (int i = 0; i < 20; ++i) {
    ModelParams p = (i % 2 == 0) ? four_band_params(unit(rng) * 7.0)
                                 : baseline_loop();
    double pp = unit(rng);
    double yy = unit(rng);
    Jacobian2 a = reduced_jacobian(p, ReducedState{pp, yy});
    Jacobian2 f = fd_jacobian(p, pp, yy);
    CHECK(a.j11 == doctest::Approx(f.j11).epsilon(1e-6));
    CHECK(a.j12 == doctest::Approx(f.j12).epsilon(1e-6));
    CHECK(a.j21 == doctest::Approx(f.j21).epsilon(1e-6));
    CHECK(a.j22 == doctest::Approx(f.j22).epsilon(1e-6));
  }
}

TEST_CASE("uniqueness condition compares the hill slope to the linear gain") {
  UniquenessCheck u = uniqueness_condition(four_band_params(25.0));
  CHECK(u.applicable);
  CHECK(u.unique_guaranteed);
  CHECK(u.max_hill_slope ==
        doctest::Approx(1.2665621530347415).epsilon(1e-12));
  CHECK(u.threshold == doctest::Approx(30.0).epsilon(1e-12));
  CHECK(u.margin == doctest::Approx(30.0 - 1.2665621530347415).epsilon(1e-9));

  // no autocatalysis: trivially unique
  UniquenessCheck lin = uniqueness_condition(baseline_loop());
  CHECK(lin.applicable);
  CHECK(lin.unique_guaranteed);
  CHECK(lin.max_hill_slope == 0.0);

  // overwhelming autocatalysis: the bound cannot certify uniqueness
  ModelParams big = four_band_params(25.0);
  big.V = 400.0;
  UniquenessCheck huge = uniqueness_condition(big);
  CHECK(!huge.unique_guaranteed);
  CHECK(huge.max_hill_slope ==
        doctest::Approx(259.80762113533159).epsilon(1e-12));

  // the two-root set violates the bound, as it must
  UniquenessCheck both = uniqueness_condition(two_root_params());
  CHECK(!both.unique_guaranteed);
  CHECK(both.max_hill_slope ==
        doctest::Approx(1.3639900109604909).epsilon(1e-12));
  CHECK(both.threshold == doctest::Approx(1.3).epsilon(1e-12));

  // n = 1 puts the steepest slope at y = 0 where the bound does not apply
  ModelParams n1 = four_band_params(25.0);
  n1.n = 1.0;
  UniquenessCheck first = uniqueness_condition(n1);
  CHECK(!first.applicable);
}

TEST_CASE("switch locus in lambda") {
  std::vector<double> sw = switch_lambdas(four_band_params(0.0), 1.0, 30.0);
  REQUIRE(sw.size() == 3);
  CHECK(sw[0] == doctest::Approx(1.9776334944105842).epsilon(1e-9));
  CHECK(sw[1] == doctest::Approx(12.289596234329873).epsilon(1e-9));
  CHECK(sw[2] == doctest::Approx(26.332770271259543).epsilon(1e-9));

  std::vector<double> nb = switch_lambdas(narrow_band_params(0.0), 0.0, 30.0);
  REQUIRE(nb.size() == 3);
  CHECK(nb[0] == doctest::Approx(0.20416802384004657).epsilon(1e-9));
  CHECK(nb[1] == doctest::Approx(17.154939758366497).epsilon(1e-9));
  CHECK(nb[2] == doctest::Approx(22.840892217793457).epsilon(1e-9));

  // linear feedback: single switch at lambda = c*a*kappa/(b*delta)
  std::vector<double> lin = switch_lambdas(baseline_loop(), 0.0, 5.0);
  REQUIRE(lin.size() == 1);
  CHECK(lin[0] == doctest::Approx(2.0).epsilon(1e-12));

  // no switch inside a window strictly between two switches
  std::vector<double> none = switch_lambdas(four_band_params(0.0), 3.0, 12.0);
  CHECK(none.empty());
}

TEST_CASE("growth exponent changes sign across each switch point") {
  const std::vector<double> sw =
      switch_lambdas(four_band_params(0.0), 1.0, 30.0);
  REQUIRE(sw.size() == 3);
  for (double s : sw) {
    std::vector<EquilibriumReport> lo =
        equilibria_autocat(four_band_params(s - 0.01));
    std::vector<EquilibriumReport> hi =
        equilibria_autocat(four_band_params(s + 0.01));
    REQUIRE(!lo.empty());
    REQUIRE(!hi.empty());
    CHECK(lo[0].mu * hi[0].mu < 0.0);
  }
}

TEST_CASE("open-loop output limit formula") {
  ModelParams p;  // a = b = c = delta = 1
  CHECK(open_loop_output_limit(p, 0.5) == doctest::Approx(1.5).epsilon(1e-15));
  CHECK(open_loop_output_limit(p, -0.5) ==
        doctest::Approx(0.5).epsilon(1e-15));
  CHECK(open_loop_output_limit(p, -2.0) == 0.0);

  ModelParams q;
  q.delta = 2.0;
  CHECK(open_loop_output_limit(q, 0.0) == doctest::Approx(0.5).epsilon(1e-15));

  ModelParams ac = four_band_params(1.0);
  CHECK_THROWS_AS(open_loop_output_limit(ac, 0.0), ValidationError);
}

TEST_CASE("trajectory tail limits") {
  ModelParams p;
  IntegratorConfig c;
  c.t_end = 60.0;
  c.steady_window = 0.0;
  Trajectory tr = integrate(p, FullState{1.0, 1.0, 0.0},
                            InputSignal::constant(2.0), c);
  PYLimits lim = estimate_p_y_limits(tr);
  CHECK(lim.p_low == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(lim.p_high == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(lim.y_low == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(lim.y_high == doctest::Approx(1.0).epsilon(1e-6));

  // too few points in the tail window to say anything
  IntegratorConfig sparse = c;
  sparse.output_times = {0.0, 60.0};
  Trajectory thin = integrate(p, FullState{1.0, 1.0, 0.0},
                              InputSignal::constant(2.0), sparse);
  CHECK_THROWS_AS(estimate_p_y_limits(thin), ValidationError);
}

}  // TEST_SUITE("equilibrium")

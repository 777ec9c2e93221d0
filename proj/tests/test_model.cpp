#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "iffl/errors.hpp"
#include "iffl/model.hpp"
#include "test_params.hpp"

using namespace iffl;

TEST_SUITE("model") {

TEST_CASE("validate rejects non-positive or inconsistent parameters") {
  CHECK_NOTHROW(validate(ModelParams{}));

  ModelParams p;
  p.delta = 0.0;
  CHECK_THROWS_AS(validate(p), ValidationError);

  p = ModelParams{};
  p.a = -1.0;
  CHECK_THROWS_AS(validate(p), ValidationError);

  p = ModelParams{};
  p.V = -0.5;
  CHECK_THROWS_AS(validate(p), ValidationError);

  p = ModelParams{};
  p.V = 1.0;
  p.K = 0.0;
  CHECK_THROWS_AS(validate(p), ValidationError);

  p = ModelParams{};
  p.V = 1.0;
  p.n = 0.5;
  CHECK_THROWS_AS(validate(p), ValidationError);

  p = ModelParams{};
  p.variant = Variant::Degradation;
  CHECK_NOTHROW(validate(p));
  p.V = 1.0;
  CHECK_THROWS_AS(validate(p), ValidationError);

  p = ModelParams{};
  p.b = std::nan("");
  CHECK_THROWS_AS(validate(p), ValidationError);

  // lambda may be negative (decay-dominated input).
  p = ModelParams{};
  p.lambda = -3.0;
  CHECK_NOTHROW(validate(p));
}

TEST_CASE("hill term values and saturation") {
  ModelParams p = four_band_params(1.0);  // V = 1.95, K = 1, n = 2
  CHECK(hill_term(p, 0.0) == 0.0);
  CHECK(hill_term(p, 1.0) == doctest::Approx(0.975).epsilon(1e-15));
  CHECK(hill_term(p, 1e6) == doctest::Approx(1.95).epsilon(1e-9));

  ModelParams lin;  // V = 0: no autocatalysis regardless of y
  CHECK(hill_term(lin, 3.0) == 0.0);
}

TEST_CASE("hill derivative matches finite differences and the y=0 limit") {
  ModelParams p = four_band_params(1.0);
  const double h = 1e-6;
  for (double y : {0.2, 0.7, 1.0, 1.9, 4.0}) {
    double fd = (hill_term(p, y + h) - hill_term(p, y - h)) / (2 * h);
    CHECK(hill_term_derivative(p, y) == doctest::Approx(fd).epsilon(1e-7));
  }

  // n = 1 has a finite nonzero slope at the origin, n >= 2 starts flat.
  ModelParams n1;
  n1.V = 2.5;
  n1.K = 0.5;
  n1.n = 1.0;
  CHECK(hill_term_derivative(n1, 0.0) == doctest::Approx(5.0).epsilon(1e-15));

  ModelParams n2;
  n2.V = 2.0;
  CHECK(hill_term_derivative(n2, 0.0) == 0.0);
}

TEST_CASE("reaction term combines decay and autocatalysis") {
  ModelParams lin;  // delta = 1, V = 0
  CHECK(reaction_term_f(lin, 1.0) == doctest::Approx(-1.0).epsilon(1e-15));

  ModelParams steep;
  steep.delta = 3.0;
  CHECK(reaction_term_f(steep, 2.0) == doctest::Approx(-6.0).epsilon(1e-15));

  // Cross-checked against a 40-digit reference evaluation.
  ModelParams p = four_band_params(1.0);
  CHECK(reaction_term_f(p, 1.26) ==
        doctest::Approx(-0.063594063997526666).epsilon(1e-13));
}

TEST_CASE("closed-loop field vanishes only at the known fixed points") {
  ModelParams p = baseline_loop();

  FullDeriv d = rhs_full(p, FullState{1.0, 1.0, 0.0}, 0.0);
  CHECK(d.dx == 0.0);
  CHECK(d.dy == 0.0);
  CHECK(d.dw == doctest::Approx(-1.0).epsilon(1e-15));

  ReducedDeriv rd = rhs_reduced(p, ReducedState{2.0 / 3.0, 2.0 / 3.0});
  CHECK(std::fabs(rd.dp) < 1e-15);
  CHECK(std::fabs(rd.dy) < 1e-15);

  // The p = 0 axis is invariant: nothing regrows from extinction.
  CHECK(rhs_reduced(p, ReducedState{0.0, 0.37}).dp == 0.0);

  // Autocatalytic interior root, digits from the reference root solve.
  ModelParams q = four_band_params(25.0);
  ReducedDeriv at_root = rhs_reduced(
      q, ReducedState{0.63172976575648246, 1.2584135117121759});
  CHECK(std::fabs(at_root.dp) < 1e-12);
  CHECK(std::fabs(at_root.dy) < 1e-12);
}

TEST_CASE("degradation variant removes y via x instead of feeding it") {
  ModelParams p;
  p.variant = Variant::Degradation;
  FullDeriv d = rhs_full(p, FullState{1.0, 1.0, 0.0}, 0.0);
  CHECK(d.dx == 0.0);
  CHECK(d.dy == 0.0);  // c*u - delta*x*y balances at (1, 1, 0)

  FullDeriv d2 = rhs_full(p, FullState{2.0, 1.0, 0.0}, 0.0);
  CHECK(d2.dy == doctest::Approx(1.0 - 2.0).epsilon(1e-15));

  CHECK_THROWS_AS(rhs_reduced(p, ReducedState{1.0, 1.0}),
                  ValidationError);
  CHECK_THROWS_AS(rhs_reduced_open(p, ReducedState{1.0, 1.0}, 0.0),
                  ValidationError);
}

TEST_CASE("open-loop p equation is logistic in p") {
  ModelParams p;  // a = b = 1
  CHECK(rhs_open_loop_p(p, 1.0, 0.0) == 0.0);
  CHECK(rhs_open_loop_p(p, 2.0, 0.0) == doctest::Approx(-2.0).epsilon(1e-15));
  CHECK(rhs_open_loop_p(p, 1.0, 0.5) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(rhs_open_loop_p(p, 0.0, 3.0) == 0.0);
}

TEST_CASE("reduction is the chain-rule image of the full field") {
  std::mt19937 rng(91u);
  std::uniform_real_distribution<double> unit(0.1, 2.5);
  for (int i = 0; i < 25; ++i) {
    ModelParams p = four_band_params(unit(rng) * 10.0);
    FullState s{unit(rng), unit(rng), std::log(unit(rng))};
    FullDeriv fd = rhs_full(p, s, 0.0);
    double pr = std::exp(s.w) / s.x;
    ReducedDeriv rd = rhs_reduced(p, ReducedState{pr, s.y});
    // p = u/x so p' = p*(w' - x'/x).
    CHECK(rd.dp == doctest::Approx(pr * (fd.dw - fd.dx / s.x)).epsilon(1e-12));
    CHECK(rd.dy == doctest::Approx(fd.dy).epsilon(1e-12));
  }
}

TEST_CASE("normalization rescales rates as documented") {
  ModelParams p;
  p.a = 2.0;
  p.kappa = 1.5;
  p.lambda = 3.0;
  NormalizedModel nm = normalize_params(p);
  CHECK(nm.params.a == doctest::Approx(1.0));
  CHECK(nm.params.b == doctest::Approx(1.0));
  CHECK(nm.params.c == doctest::Approx(1.0));
  CHECK(nm.params.delta == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(nm.params.lambda == doctest::Approx(1.5).epsilon(1e-15));
  CHECK(nm.params.kappa == doctest::Approx(0.75).epsilon(1e-15));
  CHECK(nm.scaling.t_scale == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(nm.scaling.x_scale == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(nm.scaling.y_scale == doctest::Approx(1.0).epsilon(1e-15));  // c/b

  ModelParams id;  // already normalized
  NormalizedModel nid = normalize_params(id);
  CHECK(nid.params.delta == id.delta);
  CHECK(nid.scaling.x_scale == 1.0);
  CHECK(nid.scaling.y_scale == 1.0);
  CHECK(nid.scaling.t_scale == 1.0);

  ModelParams dg;
  dg.variant = Variant::Degradation;
  dg.c = 2.0;
  NormalizedModel nd = normalize_params(dg);
  CHECK(nd.params.delta == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(nd.params.kappa == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(nd.scaling.y_scale == doctest::Approx(2.0).epsilon(1e-15));

  ModelParams ac = four_band_params(1.0);
  CHECK_THROWS_AS(normalize_params(ac), ValidationError);
}

TEST_CASE("scaling record round-trips states and times") {
  ScalingRecord sc{0.5, 2.0, 0.25};
  FullState s{1.2, 3.4, -0.7};
  FullState back = sc.from_normalized(sc.to_normalized(s));
  CHECK(back.x == doctest::Approx(s.x).epsilon(1e-15));
  CHECK(back.y == doctest::Approx(s.y).epsilon(1e-15));
  CHECK(back.w == s.w);  // log-abundance is never rescaled
  CHECK(sc.time_from_normalized(sc.time_to_normalized(7.0)) ==
        doctest::Approx(7.0).epsilon(1e-15));
}

TEST_CASE("constant linear and exponential inputs") {
  InputSignal c = InputSignal::constant(5.0);
  CHECK(c.u(0.0) == 5.0);
  CHECK(c.u(17.0) == 5.0);
  CHECK(c.v(3.0) == 0.0);
  CHECK(c.log_u(0.0) == doctest::Approx(std::log(5.0)).epsilon(1e-15));
  CHECK(c.asymptotic_mu() == 0.0);
  CHECK(c.discontinuities().empty());
  CHECK_NOTHROW(c.validate(0.0, 100.0));
  CHECK_THROWS_AS(InputSignal::constant(0.0), ValidationError);

  InputSignal l = InputSignal::linear(3.0, 0.7);
  CHECK(l.u(10.0) == doctest::Approx(10.0).epsilon(1e-15));
  CHECK(l.v(10.0) == doctest::Approx(0.07).epsilon(1e-15));
  CHECK(l.asymptotic_mu() == 0.0);
  CHECK_NOTHROW(l.validate(0.0, 1000.0));
  InputSignal decay = InputSignal::linear(1.0, -1.0);
  CHECK_THROWS_AS(decay.validate(0.0, 2.0), ValidationError);

  InputSignal e = InputSignal::exponential(2.0, 0.5);
  CHECK(e.u(2.0) == doctest::Approx(2.0 * std::exp(1.0)).epsilon(1e-15));
  CHECK(e.log_u(2.0) == doctest::Approx(std::log(2.0) + 1.0).epsilon(1e-15));
  CHECK(e.v(100.0) == 0.5);
  CHECK(e.asymptotic_mu() == 0.5);
  CHECK_THROWS_AS(InputSignal::exponential(-1.0, 0.5), ValidationError);
}

TEST_CASE("step input is right-continuous with one seam") {
  InputSignal s = InputSignal::step(1.0, 2.0, 0.0);
  CHECK(s.u(-1.0) == 1.0);
  CHECK(s.u(0.0) == 2.0);
  CHECK(s.u(5.0) == 2.0);
  CHECK(s.v(-1.0) == 0.0);
  CHECK(s.v(1.0) == 0.0);
  CHECK(s.step_u_minus() == 1.0);
  CHECK(s.step_u_plus() == 2.0);
  REQUIRE(s.discontinuities().size() == 1);
  CHECK(s.discontinuities()[0] == 0.0);
  CHECK(s.asymptotic_mu() == 0.0);
  CHECK_THROWS_AS(InputSignal::step(1.0, 0.0, 0.0), ValidationError);
}

TEST_CASE("sampled input interpolates log-linearly and holds outside") {
  InputSignal s = InputSignal::sampled({{0.0, 1.0}, {1.0, std::exp(1.0)}});
  CHECK(s.u(0.5) == doctest::Approx(std::exp(0.5)).epsilon(1e-14));
  CHECK(s.v(0.5) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(s.u(2.0) == doctest::Approx(std::exp(1.0)).epsilon(1e-15));
  CHECK(s.v(2.0) == 0.0);
  CHECK(s.u(-1.0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(s.v(-1.0) == 0.0);
  CHECK(!s.asymptotic_mu().has_value());
  CHECK(s.table().size() == 2);

  CHECK_THROWS_AS(InputSignal::sampled({{0.0, 1.0}}), ValidationError);
  CHECK_THROWS_AS(InputSignal::sampled({{0.0, 1.0}, {0.0, 2.0}}),
                  ValidationError);
  CHECK_THROWS_AS(InputSignal::sampled({{0.0, 1.0}, {1.0, -1.0}}),
                  ValidationError);
}

TEST_CASE("outcome and variant names") {
  CHECK(std::string(to_string(Outcome::Elimination)) == "Elimination");
  CHECK(std::string(to_string(Outcome::Proliferation)) == "Proliferation");
  CHECK(std::string(to_string(Outcome::Marginal)) == "Marginal");
  CHECK(std::string(to_string(Variant::ProductionInhibition)) ==
        "ProductionInhibition");
  CHECK(std::string(to_string(Variant::Degradation)) == "Degradation");
}

}  // TEST_SUITE("model")

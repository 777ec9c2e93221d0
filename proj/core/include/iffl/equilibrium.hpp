#pragma once

#include <vector>

#include "iffl/integrate.hpp"
#include "iffl/model.hpp"

namespace iffl {

enum class Stability { StableNodeFocus, Saddle, Unstable, Degenerate };
const char* to_string(Stability s);

enum class EquilibriumSource { ClosedForm, RootScan };
const char* to_string(EquilibriumSource s);

struct Jacobian2 {
  double j11 = 0.0, j12 = 0.0;
  double j21 = 0.0, j22 = 0.0;
  double trace() const { return j11 + j22; }
  double det() const { return j11 * j22 - j12 * j21; }
};

// Jacobian of the reduced closed-loop vector field at an arbitrary point.
Jacobian2 reduced_jacobian(const ModelParams& params, const ReducedState& s);

// Degenerate is reported when |det| or |trace| sits below degenerate_tol
// instead of guessing a class on the boundary.
Stability classify_stability(const Jacobian2& j, double degenerate_tol = 1e-9);

struct EquilibriumReport {
  double p_bar = 0.0;
  double y_bar = 0.0;
  double mu = 0.0;
  Jacobian2 jacobian;
  Stability stability = Stability::Degenerate;
  Outcome outcome = Outcome::Marginal;
  EquilibriumSource source = EquilibriumSource::ClosedForm;
};

// |mu| <= mu_tol labels Marginal; the exact-balance set is measure zero but
// parameter sweeps do land on it.
Outcome outcome_from_mu(double mu, double mu_tol = 1e-9);

// Piecewise closed form for the V = 0 closed loop: the origin when
// a + lambda < 0, otherwise the interior point.
EquilibriumReport closed_loop_equilibrium_linear(const ModelParams& params);

// Report for the (p, y) = (0, 0) equilibrium at any V.
EquilibriumReport origin_report(const ModelParams& params);

// Effective growth rate of the V = 0 closed loop: lambda when
// lambda < -a, otherwise (lambda*b*delta - c*kappa*a)/(b*delta + c*kappa).
double solve_mu(const ModelParams& params);

// Interior equilibria found by scanning
//   g(y) = a + lambda - kappa*y + (b/c)*f(y)
// for sign changes over (0, (a+lambda)/kappa]. When a + lambda <= 0 only the
// origin is reported. Accepts V = 0 (the scan then finds the closed-form
// point).
std::vector<EquilibriumReport> equilibria_autocat(const ModelParams& params);

// Dispatcher used by the equilibria experiment: the autocatalytic scan when
// V > 0, otherwise the closed form plus the origin saddle when a+lambda > 0.
std::vector<EquilibriumReport> closed_loop_equilibria(const ModelParams& params);

// Asymptotic open-loop output level (c/(b*delta))*max{0, a+mu} for an input
// with log-derivative tending to mu. V = 0 only.
double open_loop_output_limit(const ModelParams& params, double mu_input);

struct PYLimits {
  double p_low = 0.0, p_high = 0.0;
  double y_low = 0.0, y_high = 0.0;
  bool steady = false;
};

// Min/max of p and y over the trailing fifth of the trajectory, as empirical
// liminf/limsup proxies. Throws if that window holds fewer than 10 samples.
PYLimits estimate_p_y_limits(const Trajectory& traj);

struct UniquenessCheck {
  bool applicable = false;
  bool unique_guaranteed = false;
  double max_hill_slope = 0.0;
  double threshold = 0.0;
  double margin = 0.0;
};

// Sufficient condition for a unique interior root: the Hill-term derivative
// maximum (attained at y* = ((n-1)/(n+1))^{1/n} K) below kappa + b*delta/c.
// Not applicable for n <= 1 with V > 0 (the supremum sits at y = 0+).
UniquenessCheck uniqueness_condition(const ModelParams& params);

// Lambda values in [lambda_min, lambda_max] where the interior branch crosses
// mu = 0: solutions of f(y) = -a*c/b mapped through lambda = kappa*y.
std::vector<double> switch_lambdas(const ModelParams& params, double lambda_min,
                                   double lambda_max);

}  // namespace iffl

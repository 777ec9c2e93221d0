#include "iffl/equilibrium.hpp"

#include <algorithm>
#include <cmath>

#include "iffl/errors.hpp"
#include "iffl/rootfind.hpp"

namespace iffl {

const char* to_string(Stability s) {
  switch (s) {
    case Stability::StableNodeFocus:
      return "StableNodeFocus";
    case Stability::Saddle:
      return "Saddle";
    case Stability::Unstable:
      return "Unstable";
    case Stability::Degenerate:
      return "Degenerate";
  }
  return "?";
}

const char* to_string(EquilibriumSource s) {
  return s == EquilibriumSource::ClosedForm ? "ClosedForm" : "RootScan";
}

Jacobian2 reduced_jacobian(const ModelParams& params, const ReducedState& s) {
  Jacobian2 j;
  j.j11 = params.a + params.lambda - params.kappa * s.y - 2.0 * params.b * s.p;
  j.j12 = -params.kappa * s.p;
  j.j21 = params.c;
  j.j22 = -params.delta + hill_term_derivative(params, s.y);
  return j;
}

Stability classify_stability(const Jacobian2& j, double degenerate_tol) {
  const double det = j.det();
  const double trace = j.trace();
  if (std::fabs(det) < degenerate_tol || std::fabs(trace) < degenerate_tol) {
    return Stability::Degenerate;
  }
  if (det < 0.0) return Stability::Saddle;
  return trace < 0.0 ? Stability::StableNodeFocus : Stability::Unstable;
}

Outcome outcome_from_mu(double mu, double mu_tol) {
  if (std::fabs(mu) <= mu_tol) return Outcome::Marginal;
  return mu < 0.0 ? Outcome::Elimination : Outcome::Proliferation;
}

namespace {

EquilibriumReport make_report(const ModelParams& params, double p_bar,
                              double y_bar, double mu,
                              EquilibriumSource source) {
  EquilibriumReport r;
  r.p_bar = p_bar;
  r.y_bar = y_bar;
  r.mu = mu;
  r.jacobian = reduced_jacobian(params, {p_bar, y_bar});
  r.stability = classify_stability(r.jacobian);
  r.outcome = outcome_from_mu(mu);
  r.source = source;
  return r;
}

}  // namespace

EquilibriumReport origin_report(const ModelParams& params) {
  validate(params);
  return make_report(params, 0.0, 0.0, params.lambda,
                     EquilibriumSource::ClosedForm);
}

double solve_mu(const ModelParams& params) {
  validate(params);
  if (params.V != 0.0) {
    throw ValidationError("solve_mu holds for V = 0; use equilibria_autocat");
  }
  if (params.lambda < -params.a) return params.lambda;
  return (params.lambda * params.b * params.delta -
          params.c * params.kappa * params.a) /
         (params.b * params.delta + params.c * params.kappa);
}

EquilibriumReport closed_loop_equilibrium_linear(const ModelParams& params) {
  validate(params);
  if (params.V != 0.0) {
    throw ValidationError(
        "closed-form equilibrium holds for V = 0; use equilibria_autocat");
  }
  if (params.variant != Variant::ProductionInhibition) {
    throw ValidationError("closed-loop equilibrium requires ProductionInhibition");
  }
  if (params.a + params.lambda < 0.0) {
    return origin_report(params);  // mu = lambda there
  }
  const double y_bar = params.c * (params.a + params.lambda) /
                       (params.b * params.delta + params.c * params.kappa);
  const double p_bar = (params.delta / params.c) * y_bar;
  return make_report(params, p_bar, y_bar, solve_mu(params),
                     EquilibriumSource::ClosedForm);
}

std::vector<EquilibriumReport> equilibria_autocat(const ModelParams& params) {
  validate(params);
  if (params.variant != Variant::ProductionInhibition) {
    throw ValidationError("equilibria_autocat requires ProductionInhibition");
  }
  const double al = params.a + params.lambda;
  if (al <= 0.0) {
    return {origin_report(params)};
  }

  const auto g = [&](double y) {
    return al - params.kappa * y +
           (params.b / params.c) * reaction_term_f(params, y);
  };
  const double g_tol = 1e-12 * (1.0 + std::fabs(al));
  const double y_max = al / params.kappa;

  auto roots = find_positive_roots(g, y_max, 2048, g_tol);
  // A root hugging the scan boundary may be poorly bracketed; widen once.
  if (!roots.empty() && roots.back() > 0.999999 * y_max) {
    roots = find_positive_roots(g, 1.05 * y_max, 2048, g_tol);
  }

  std::vector<EquilibriumReport> out;
  for (double y_bar : roots) {
    const double p_bar = (al - params.kappa * y_bar) / params.b;
    if (!(p_bar > 0.0)) continue;
    out.push_back(make_report(params, p_bar, y_bar,
                              params.lambda - params.kappa * y_bar,
                              EquilibriumSource::RootScan));
  }
  return out;
}

std::vector<EquilibriumReport> closed_loop_equilibria(const ModelParams& params) {
  validate(params);
  if (params.autocatalytic()) {
    return equilibria_autocat(params);
  }
  std::vector<EquilibriumReport> out{closed_loop_equilibrium_linear(params)};
  if (params.a + params.lambda > 0.0) {
    out.push_back(origin_report(params));  // the saddle at the origin
  }
  return out;
}

double open_loop_output_limit(const ModelParams& params, double mu_input) {
  validate(params);
  if (params.V != 0.0) {
    throw ValidationError(
        "the open-loop y limit formula holds only without autocatalysis");
  }
  return params.c / (params.b * params.delta) *
         std::max(0.0, params.a + mu_input);
}

PYLimits estimate_p_y_limits(const Trajectory& traj) {
  if (traj.size() < 2) {
    throw ValidationError("trajectory too short for limit estimation");
  }
  const double t0 = traj.t.front();
  const double t1 = traj.t.back();
  const double t_lo = t1 - 0.2 * (t1 - t0);
  std::size_t first = traj.size();
  for (std::size_t i = 0; i < traj.size(); ++i) {
    if (traj.t[i] >= t_lo) {
      first = i;
      break;
    }
  }
  if (traj.size() - first < 10) {
    throw ValidationError(
        "fewer than 10 samples in the tail window; lengthen the run");
  }
  PYLimits lim;
  lim.p_low = lim.p_high = traj.p[first];
  lim.y_low = lim.y_high = traj.y[first];
  for (std::size_t i = first + 1; i < traj.size(); ++i) {
    lim.p_low = std::min(lim.p_low, traj.p[i]);
    lim.p_high = std::max(lim.p_high, traj.p[i]);
    lim.y_low = std::min(lim.y_low, traj.y[i]);
    lim.y_high = std::max(lim.y_high, traj.y[i]);
  }
  lim.steady = traj.meta.terminal == TerminalFlag::Steady;
  return lim;
}

UniquenessCheck uniqueness_condition(const ModelParams& params) {
  validate(params);
  UniquenessCheck r;
  r.threshold = params.kappa + params.b * params.delta / params.c;
  if (params.V == 0.0) {
    r.applicable = true;
    r.unique_guaranteed = true;
    r.max_hill_slope = 0.0;
    r.margin = r.threshold;
    return r;
  }
  if (params.n <= 1.0) {
    // supremum of the derivative sits at y = 0+, the criterion's interior
    // maximum does not exist
    r.applicable = false;
    r.max_hill_slope = params.V / params.K;
    r.margin = r.threshold - r.max_hill_slope;
    return r;
  }
  const double y_star =
      std::pow((params.n - 1.0) / (params.n + 1.0), 1.0 / params.n) * params.K;
  r.applicable = true;
  r.max_hill_slope = hill_term_derivative(params, y_star);
  r.margin = r.threshold - r.max_hill_slope;
  r.unique_guaranteed = r.max_hill_slope < r.threshold;
  return r;
}

std::vector<double> switch_lambdas(const ModelParams& params, double lambda_min,
                                   double lambda_max) {
  validate(params);
  if (params.variant != Variant::ProductionInhibition) {
    throw ValidationError("switch locus requires ProductionInhibition");
  }
  if (!(lambda_max > 0.0) || lambda_max < lambda_min) return {};

  const double q = params.a * params.c / params.b;
  // all solutions of delta*y = q + hill(y) satisfy y <= (q + V)/delta
  const double y_nat = (q + params.V) / params.delta * (1.0 + 1e-9);
  const double y_hi = std::min(y_nat, lambda_max / params.kappa * (1.0 + 1e-12));
  if (!(y_hi > 0.0)) return {};

  const auto s = [&](double y) { return q + reaction_term_f(params, y); };
  const auto roots = find_positive_roots(s, y_hi, 2048, 1e-12 * (1.0 + q));

  std::vector<double> out;
  for (double y : roots) {
    const double lam = params.kappa * y;
    if (lam >= lambda_min && lam <= lambda_max) out.push_back(lam);
  }
  return out;
}

}  // namespace iffl

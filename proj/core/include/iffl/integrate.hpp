#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "iffl/model.hpp"

namespace iffl {

enum class TerminalFlag { ReachedTEnd, Steady, Diverged };

const char* to_string(TerminalFlag f);

struct IntegratorConfig {
  double rel_tol = 1e-8;
  double abs_tol = 1e-10;
  double t0 = 0.0;
  double t_end = 200.0;
  // 0 means t_end / 50
  double max_step = 0.0;
  // when set, the trajectory is sampled at exactly these times via the
  // interpolant instead of at every accepted step
  std::vector<double> output_times;
  // negative means t_end / 10; zero disables steady-state detection
  double steady_window = -1.0;
  double steady_tol = 1e-9;
  double divergence_guard = 1e12;
  // accepted-step budget; exhausting it raises NumericalError. Guards against
  // stability-limited crawling (e.g. the degradation variant once delta*x is
  // huge), where an explicit method would march forever at a tiny step.
  std::uint64_t max_steps = 10'000'000;
};

enum class StateKind { Full, Reduced };

struct TrajectoryMeta {
  TerminalFlag terminal = TerminalFlag::ReachedTEnd;
  std::uint64_t steps_accepted = 0;
  std::uint64_t steps_rejected = 0;
  std::uint64_t rhs_evaluations = 0;
  double steady_window = 0.0;
  double t_final = 0.0;
  bool closed_loop = true;
};

// Columns are stored as parallel vectors. Reduced trajectories leave x and w
// empty; q = c*u/x is the production drive seen by y (c*p in reduced form).
struct Trajectory {
  StateKind kind = StateKind::Full;
  std::vector<double> t;
  std::vector<double> x;
  std::vector<double> y;
  std::vector<double> w;
  std::vector<double> p;
  std::vector<double> v;
  std::vector<double> q;
  TrajectoryMeta meta;

  std::size_t size() const { return t.size(); }
  FullState full_at(std::size_t i) const;
  ReducedState reduced_at(std::size_t i) const;
};

Trajectory integrate(const ModelParams& params, const FullState& init,
                     const std::optional<InputSignal>& input,
                     const IntegratorConfig& config);

Trajectory integrate(const ModelParams& params, const ReducedState& init,
                     const std::optional<InputSignal>& input,
                     const IntegratorConfig& config);

// Least-squares slope of w over the trailing window (in time units) of the
// trajectory. Requires a full-state trajectory.
double fit_w_slope(const Trajectory& traj, double window);

// Sign of the fitted w-slope on the trailing steady window, with a dead band:
// |slope| <= slope_tol reports Marginal. Requires a closed-loop full
// trajectory.
Outcome classify_u_outcome(const Trajectory& traj, double slope_tol = 1e-4);

struct StepResponse {
  double q_peak = 0.0;
  double y_pre = 0.0;
  double y_final = 0.0;
  Trajectory trajectory;
};

// Open-loop step experiment: hold u = u_minus until the state is preadapted,
// then step to u_plus at t = 0 and record the transient. When preadapt is
// true the initial condition is placed on the preadapted manifold
// analytically (x = b*u_minus/a, y at the lowest stable root of the
// y-equation); otherwise init is used as given.
StepResponse simulate_step_response(const ModelParams& params, double u_minus,
                                    double u_plus, bool preadapt,
                                    const IntegratorConfig& config,
                                    const FullState& init = FullState{});

namespace dp5 {
// Fifth-order quadrature weights of the embedded pair (stage 7 unused).
extern const double kWeights[7];
// Stage weight of the quartic interpolant at fraction theta of a step;
// dense_weight(i, 1) reproduces kWeights[i].
double dense_weight(std::size_t stage, double theta);
}  // namespace dp5

}  // namespace iffl

#include "iffl/integrate.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <string>

#include "iffl/errors.hpp"
#include "iffl/rootfind.hpp"

namespace iffl {

namespace {

// Dormand-Prince 5(4) tableau with the Shampine quartic interpolant.
constexpr double kC[7] = {0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0};

constexpr double kA[7][6] = {
    {},
    {1.0 / 5.0},
    {3.0 / 40.0, 9.0 / 40.0},
    {44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0},
    {19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0},
    {9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0,
     -5103.0 / 18656.0},
    {35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0,
     11.0 / 84.0},
};

constexpr double kB4[7] = {5179.0 / 57600.0,    0.0,
                           7571.0 / 16695.0,    393.0 / 640.0,
                           -92097.0 / 339200.0, 187.0 / 2100.0,
                           1.0 / 40.0};

// Interpolant coefficients over powers [theta, theta^2, theta^3, theta^4].
constexpr double kDense[7][4] = {
    {1.0, -8048581381.0 / 2820520608.0, 8663915743.0 / 2820520608.0,
     -12715105075.0 / 11282082432.0},
    {0.0, 0.0, 0.0, 0.0},
    {0.0, 131558114200.0 / 32700410799.0, -68118460800.0 / 10900136933.0,
     87487479700.0 / 32700410799.0},
    {0.0, -1754552775.0 / 470086768.0, 14199869525.0 / 1410260304.0,
     -10690763975.0 / 1880347072.0},
    {0.0, 127303824393.0 / 49829197408.0, -318862633887.0 / 49829197408.0,
     701980252875.0 / 199316789632.0},
    {0.0, -282668133.0 / 205662961.0, 2019193451.0 / 616988883.0,
     -1453857185.0 / 822651844.0},
    {0.0, 40617522.0 / 29380423.0, -110615467.0 / 29380423.0,
     69997945.0 / 29380423.0},
};

using Vec = std::array<double, 3>;

// How the internal ODE state maps onto the model.
enum class Mode { FullClosed, FullOpen, ReducedClosed, ReducedOpen };

struct System {
  const ModelParams* params = nullptr;
  const InputSignal* input = nullptr;
  Mode mode = Mode::FullClosed;
  std::size_t dim = 3;

  void deriv(double t, const Vec& s, Vec& out) const {
    switch (mode) {
      case Mode::FullClosed: {
        const FullDeriv d = rhs_full(*params, {s[0], s[1], s[2]}, t, nullptr);
        out = {d.dx, d.dy, d.dw};
        return;
      }
      case Mode::FullOpen: {
        const FullDeriv d =
            rhs_full(*params, {s[0], s[1], input->log_u(t)}, t, input);
        out = {d.dx, d.dy, 0.0};
        return;
      }
      case Mode::ReducedClosed: {
        const ReducedDeriv d = rhs_reduced(*params, {s[0], s[1]});
        out = {d.dp, d.dy, 0.0};
        return;
      }
      case Mode::ReducedOpen: {
        const ReducedDeriv d =
            rhs_reduced_open(*params, {s[0], s[1]}, input->v(t));
        out = {d.dp, d.dy, 0.0};
        return;
      }
    }
  }

  // w may take any sign; every other carried component must stay positive.
  bool positive(const Vec& s) const {
    for (std::size_t i = 0; i < dim; ++i) {
      if (mode == Mode::FullClosed && i == 2) continue;
      if (!(s[i] > 0.0)) return false;
    }
    for (std::size_t i = 0; i < dim; ++i) {
      if (!std::isfinite(s[i])) return false;
    }
    return true;
  }

  bool diverged(const Vec& s, double guard) const {
    switch (mode) {
      case Mode::FullClosed:
        // x and w grow without bound under proliferation by design; they are
        // cut off only where exp() would stop being representable.
        return s[1] > guard || s[0] > 1e290 || s[2] > 700.0;
      case Mode::FullOpen:
        return s[1] > guard || s[0] > 1e290;
      case Mode::ReducedClosed:
      case Mode::ReducedOpen:
        return s[0] > guard || s[1] > guard;
    }
    return false;
  }
};

struct Emitter {
  Trajectory* traj;
  const System* sys;

  void emit(double t, const Vec& s) const {
    Trajectory& tr = *traj;
    if (!tr.t.empty() && tr.t.back() == t) return;  // segment seam duplicate
    const ModelParams& mp = *sys->params;
    tr.t.push_back(t);
    switch (sys->mode) {
      case Mode::FullClosed: {
        const double x = s[0], y = s[1], w = s[2];
        const double p = std::exp(w - std::log(x));
        tr.x.push_back(x);
        tr.y.push_back(y);
        tr.w.push_back(w);
        tr.p.push_back(p);
        tr.v.push_back(mp.lambda - mp.kappa * y);
        tr.q.push_back(mp.variant == Variant::ProductionInhibition
                           ? mp.c * p
                           : mp.c * std::exp(w));
        return;
      }
      case Mode::FullOpen: {
        const double x = s[0], y = s[1], w = sys->input->log_u(t);
        const double p = std::exp(w - std::log(x));
        tr.x.push_back(x);
        tr.y.push_back(y);
        tr.w.push_back(w);
        tr.p.push_back(p);
        tr.v.push_back(sys->input->v(t));
        tr.q.push_back(mp.variant == Variant::ProductionInhibition
                           ? mp.c * p
                           : mp.c * std::exp(w));
        return;
      }
      case Mode::ReducedClosed:
      case Mode::ReducedOpen: {
        const double p = s[0], y = s[1];
        tr.y.push_back(y);
        tr.p.push_back(p);
        tr.v.push_back(sys->mode == Mode::ReducedClosed
                           ? mp.lambda - mp.kappa * y
                           : sys->input->v(t));
        tr.q.push_back(mp.c * p);
        return;
      }
    }
  }
};

double rms_scaled(const Vec& e, const Vec& y0, const Vec& y1, std::size_t dim,
                  double abs_tol, double rel_tol) {
  double acc = 0.0;
  for (std::size_t i = 0; i < dim; ++i) {
    const double sc =
        abs_tol + rel_tol * std::max(std::fabs(y0[i]), std::fabs(y1[i]));
    const double r = e[i] / sc;
    acc += r * r;
  }
  return std::sqrt(acc / static_cast<double>(dim));
}

struct SteadyTracker {
  double since = -1.0;  // start of the current sub-threshold stretch

  // Scaled derivative norm over every integrated component. Including w for
  // the closed loop matters: while (x, y) park near the origin during a
  // crash-and-recover transient, w' = lambda keeps the run alive, so the
  // transit is not mistaken for convergence.
  static double norm(const System& sys, const Vec& f, const Vec& s) {
    double m = 0.0;
    for (std::size_t i = 0; i < sys.dim; ++i) {
      m = std::max(m, std::fabs(f[i]) / (1.0 + std::fabs(s[i])));
    }
    return m;
  }
};

struct StepperState {
  Vec y{};
  double t = 0.0;
  Vec k1{};  // FSAL cache, valid at (t, y)
  bool have_k1 = false;
};

// Integrates one smooth segment [t0, t1]. Returns false when a terminal
// condition (steady/diverged) stopped the run early.
bool integrate_segment(const System& sys, const IntegratorConfig& cfg,
                       double seg_t0, double seg_t1, double max_step,
                       double steady_window, StepperState& st,
                       SteadyTracker& steady, Emitter& emitter,
                       const std::vector<double>& out_times,
                       std::size_t& next_out, Trajectory& traj) {
  const std::size_t dim = sys.dim;
  TrajectoryMeta& meta = traj.meta;

  auto eval = [&](double t, const Vec& s, Vec& out) {
    sys.deriv(t, s, out);
    ++meta.rhs_evaluations;
  };

  Vec f0{};
  eval(seg_t0, st.y, f0);
  st.k1 = f0;
  st.t = seg_t0;

  // Hairer-style initial step guess.
  double h;
  {
    double d0 = 0.0, d1 = 0.0;
    for (std::size_t i = 0; i < dim; ++i) {
      const double sc = cfg.abs_tol + cfg.rel_tol * std::fabs(st.y[i]);
      d0 += (st.y[i] / sc) * (st.y[i] / sc);
      d1 += (f0[i] / sc) * (f0[i] / sc);
    }
    d0 = std::sqrt(d0 / static_cast<double>(dim));
    d1 = std::sqrt(d1 / static_cast<double>(dim));
    double h0 = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * (d0 / d1);
    h0 = std::min(h0, seg_t1 - seg_t0);
    double h1 = h0;
    Vec probe{}, f1{};
    for (std::size_t i = 0; i < dim; ++i) probe[i] = st.y[i] + h0 * f0[i];
    if (sys.positive(probe)) {
      eval(seg_t0 + h0, probe, f1);
      double d2 = 0.0;
      for (std::size_t i = 0; i < dim; ++i) {
        const double sc = cfg.abs_tol + cfg.rel_tol * std::fabs(st.y[i]);
        d2 += ((f1[i] - f0[i]) / sc) * ((f1[i] - f0[i]) / sc);
      }
      d2 = std::sqrt(d2 / static_cast<double>(dim)) / h0;
      const double dm = std::max(d1, d2);
      h1 = dm <= 1e-15 ? std::max(1e-6, h0 * 1e-3) : std::pow(0.01 / dm, 0.2);
    } else {
      h1 = h0 * 1e-3;
    }
    h = std::min({100.0 * h0, h1, max_step, seg_t1 - seg_t0});
    h = std::max(h, 1e-300);
  }

  const double h_floor = 1e-14 * (cfg.t_end - cfg.t0);
  std::array<Vec, 7> k{};
  k[0] = st.k1;

  while (st.t < seg_t1) {
    h = std::min(h, seg_t1 - st.t);
    if (h < h_floor) {
      throw NumericalError("integration stalled near t = " +
                           std::to_string(st.t) +
                           " (step size collapsed; system too stiff)");
    }

    bool reject = false;
    Vec y_new{};
    double err = 0.0;
    try {
      Vec stage{};
      for (std::size_t s = 1; s < 6; ++s) {
        for (std::size_t i = 0; i < dim; ++i) {
          double acc = 0.0;
          for (std::size_t j = 0; j < s; ++j) acc += kA[s][j] * k[j][i];
          stage[i] = st.y[i] + h * acc;
        }
        eval(st.t + kC[s] * h, stage, k[s]);
      }
      for (std::size_t i = 0; i < dim; ++i) {
        double acc = 0.0;
        for (std::size_t j = 0; j < 6; ++j) acc += kA[6][j] * k[j][i];
        y_new[i] = st.y[i] + h * acc;
      }
      if (!sys.positive(y_new)) {
        reject = true;
      } else {
        eval(st.t + h, y_new, k[6]);
        Vec e{};
        for (std::size_t i = 0; i < dim; ++i) {
          double acc = 0.0;
          for (std::size_t j = 0; j < 7; ++j) {
            acc += (dp5::kWeights[j] - kB4[j]) * k[j][i];
          }
          e[i] = h * acc;
        }
        err = rms_scaled(e, st.y, y_new, dim, cfg.abs_tol, cfg.rel_tol);
        if (!std::isfinite(err)) reject = true;
      }
    } catch (const NumericalError&) {
      // a trial stage left the representable range; retry shorter
      reject = true;
    }

    if (reject) {
      ++meta.steps_rejected;
      h *= 0.5;
      continue;
    }

    if (err > 1.0) {
      ++meta.steps_rejected;
      h *= std::min(1.0, std::max(0.2, 0.9 * std::pow(err, -0.2)));
      continue;
    }

    // accepted
    const double t_old = st.t;
    const Vec y_old = st.y;
    st.t = t_old + h;
    // the last step is clamped to the segment; snap away rounding residue
    if (std::fabs(seg_t1 - st.t) <= 4.0 * 1e-16 * std::fabs(seg_t1)) {
      st.t = seg_t1;
    }
    st.y = y_new;
    if (++meta.steps_accepted > cfg.max_steps) {
      throw NumericalError(
          "step budget of " + std::to_string(cfg.max_steps) +
          " accepted steps exhausted near t = " + std::to_string(st.t) +
          " (system too stiff for an explicit method)");
    }

    while (next_out < out_times.size() && out_times[next_out] <= st.t) {
      const double tau = out_times[next_out];
      const double theta = (tau - t_old) / h;
      Vec yi{};
      for (std::size_t i = 0; i < dim; ++i) {
        double acc = 0.0;
        for (std::size_t j = 0; j < 7; ++j) {
          acc += k[j][i] * dp5::dense_weight(j, theta);
        }
        yi[i] = y_old[i] + h * acc;
      }
      emitter.emit(tau, yi);
      ++next_out;
    }
    if (out_times.empty()) emitter.emit(st.t, st.y);

    meta.t_final = st.t;

    if (sys.diverged(st.y, cfg.divergence_guard)) {
      meta.terminal = TerminalFlag::Diverged;
      return false;
    }

    if (steady_window > 0.0) {
      if (SteadyTracker::norm(sys, k[6], st.y) < cfg.steady_tol) {
        if (steady.since < 0.0) steady.since = t_old;
        if (st.t - steady.since >= steady_window) {
          meta.terminal = TerminalFlag::Steady;
          return false;
        }
      } else {
        steady.since = -1.0;
      }
    }

    k[0] = k[6];  // FSAL
    const double fac =
        err == 0.0 ? 5.0 : std::min(5.0, std::max(0.2, 0.9 * std::pow(err, -0.2)));
    h = std::min(h * fac, max_step);
  }
  return true;
}

Trajectory integrate_impl(const ModelParams& params, const Vec& init,
                          const std::optional<InputSignal>& input, Mode mode,
                          const IntegratorConfig& cfg) {
  validate(params);
  if (!(cfg.rel_tol > 0.0) || !(cfg.abs_tol > 0.0)) {
    throw ValidationError("integrator tolerances must be positive");
  }
  if (!(cfg.t_end > cfg.t0)) {
    throw ValidationError("t_end must exceed t0");
  }
  if (!(cfg.divergence_guard > 0.0)) {
    throw ValidationError("divergence guard must be positive");
  }
  if (cfg.max_steps == 0) {
    throw ValidationError("max_steps must be positive");
  }
  const double span = cfg.t_end - cfg.t0;
  const double max_step = cfg.max_step > 0.0 ? cfg.max_step : span / 50.0;
  const double steady_window =
      cfg.steady_window < 0.0 ? span / 10.0 : cfg.steady_window;
  if (steady_window >= span && steady_window > 0.0) {
    throw ValidationError("steady_window must be shorter than the horizon");
  }
  for (std::size_t i = 0; i < cfg.output_times.size(); ++i) {
    const double tau = cfg.output_times[i];
    if (tau < cfg.t0 || tau > cfg.t_end) {
      throw ValidationError("output_times must lie within [t0, t_end]");
    }
    if (i > 0 && tau <= cfg.output_times[i - 1]) {
      throw ValidationError("output_times must be strictly increasing");
    }
  }
  if (input) input->validate(cfg.t0, cfg.t_end);

  System sys;
  sys.params = &params;
  sys.input = input ? &*input : nullptr;
  sys.mode = mode;
  sys.dim = mode == Mode::FullClosed ? 3 : 2;

  Trajectory traj;
  traj.kind =
      (mode == Mode::FullClosed || mode == Mode::FullOpen) ? StateKind::Full
                                                           : StateKind::Reduced;
  traj.meta.closed_loop = (mode == Mode::FullClosed || mode == Mode::ReducedClosed);
  traj.meta.steady_window = steady_window;
  traj.meta.t_final = cfg.t0;

  if (!sys.positive(init)) {
    throw ValidationError("initial state must be positive and finite");
  }

  Emitter emitter{&traj, &sys};
  std::size_t next_out = 0;
  while (next_out < cfg.output_times.size() &&
         cfg.output_times[next_out] <= cfg.t0) {
    emitter.emit(cfg.t0, init);
    ++next_out;
  }
  if (cfg.output_times.empty()) emitter.emit(cfg.t0, init);

  // Split at input discontinuities; the stepper restarts on each side.
  std::vector<double> seams;
  if (input) {
    for (double d : input->discontinuities()) {
      if (d > cfg.t0 && d < cfg.t_end) seams.push_back(d);
    }
    std::sort(seams.begin(), seams.end());
  }
  seams.push_back(cfg.t_end);

  StepperState st;
  st.y = init;
  st.t = cfg.t0;
  SteadyTracker steady;

  double seg_start = cfg.t0;
  for (double seg_end : seams) {
    steady.since = -1.0;
    const bool completed =
        integrate_segment(sys, cfg, seg_start, seg_end, max_step,
                          steady_window, st, steady, emitter, cfg.output_times,
                          next_out, traj);
    if (!completed) break;
    seg_start = seg_end;
  }

  // Make sure the state where integration stopped is on record even when
  // output_times skipped past it.
  if (!cfg.output_times.empty() &&
      (traj.t.empty() || traj.t.back() < st.t) &&
      traj.meta.terminal != TerminalFlag::ReachedTEnd) {
    emitter.emit(st.t, st.y);
  }
  if (cfg.output_times.empty()) emitter.emit(st.t, st.y);
  return traj;
}

}  // namespace

namespace dp5 {

const double kWeights[7] = {35.0 / 384.0,
                            0.0,
                            500.0 / 1113.0,
                            125.0 / 192.0,
                            -2187.0 / 6784.0,
                            11.0 / 84.0,
                            0.0};

double dense_weight(std::size_t stage, double theta) {
  const double* p = kDense[stage];
  return theta * (p[0] + theta * (p[1] + theta * (p[2] + theta * p[3])));
}

}  // namespace dp5

const char* to_string(TerminalFlag f) {
  switch (f) {
    case TerminalFlag::ReachedTEnd:
      return "reached_t_end";
    case TerminalFlag::Steady:
      return "steady";
    case TerminalFlag::Diverged:
      return "diverged";
  }
  return "?";
}

FullState Trajectory::full_at(std::size_t i) const {
  if (kind != StateKind::Full) {
    throw ValidationError("full_at on a reduced trajectory");
  }
  return {x.at(i), y.at(i), w.at(i)};
}

ReducedState Trajectory::reduced_at(std::size_t i) const {
  return {p.at(i), y.at(i)};
}

Trajectory integrate(const ModelParams& params, const FullState& init,
                     const std::optional<InputSignal>& input,
                     const IntegratorConfig& config) {
  if (input) {
    return integrate_impl(params, {init.x, init.y, 0.0}, input, Mode::FullOpen,
                          config);
  }
  return integrate_impl(params, {init.x, init.y, init.w}, input,
                        Mode::FullClosed, config);
}

Trajectory integrate(const ModelParams& params, const ReducedState& init,
                     const std::optional<InputSignal>& input,
                     const IntegratorConfig& config) {
  if (params.variant != Variant::ProductionInhibition) {
    throw ValidationError("reduced integration requires ProductionInhibition");
  }
  return integrate_impl(params, {init.p, init.y, 0.0}, input,
                        input ? Mode::ReducedOpen : Mode::ReducedClosed, config);
}

double fit_w_slope(const Trajectory& traj, double window) {
  if (traj.kind != StateKind::Full || traj.w.empty()) {
    throw ValidationError("w slope needs a full-state trajectory");
  }
  if (traj.size() < 2) {
    throw ValidationError("trajectory too short for a slope fit");
  }
  const double t_hi = traj.t.back();
  const double t_lo = t_hi - window;
  std::size_t first = 0;
  while (first + 2 < traj.size() && traj.t[first] < t_lo) ++first;
  const std::size_t m = traj.size() - first;

  double t_mean = 0.0, w_mean = 0.0;
  for (std::size_t i = first; i < traj.size(); ++i) {
    t_mean += traj.t[i];
    w_mean += traj.w[i];
  }
  t_mean /= static_cast<double>(m);
  w_mean /= static_cast<double>(m);
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = first; i < traj.size(); ++i) {
    const double dt = traj.t[i] - t_mean;
    sxx += dt * dt;
    sxy += dt * (traj.w[i] - w_mean);
  }
  if (sxx == 0.0) {
    throw ValidationError("slope window has no time extent");
  }
  return sxy / sxx;
}

Outcome classify_u_outcome(const Trajectory& traj, double slope_tol) {
  if (!traj.meta.closed_loop) {
    throw ValidationError("u outcome is defined for closed-loop runs only");
  }
  if (traj.kind != StateKind::Full || traj.w.empty()) {
    throw ValidationError("u outcome needs w; run a full-state simulation");
  }
  if (traj.meta.terminal == TerminalFlag::Diverged) {
    // the guard can only trip on unbounded growth of u (x and y are slaved
    // to it in the closed loop), which is proliferation by definition
    return Outcome::Proliferation;
  }
  double window = traj.meta.steady_window;
  if (window <= 0.0) window = (traj.t.back() - traj.t.front()) / 10.0;
  const double slope = fit_w_slope(traj, window);
  if (slope < -slope_tol) return Outcome::Elimination;
  if (slope > slope_tol) return Outcome::Proliferation;
  return Outcome::Marginal;
}

StepResponse simulate_step_response(const ModelParams& params, double u_minus,
                                    double u_plus, bool preadapt,
                                    const IntegratorConfig& config,
                                    const FullState& init) {
  validate(params);
  if (!(u_minus > 0.0) || !(u_plus > 0.0)) {
    throw ValidationError("step levels must be positive");
  }
  if (config.t0 > 0.0) {
    throw ValidationError("step experiments place the jump at t = 0; t0 must be <= 0");
  }

  FullState start = init;
  if (preadapt) {
    start.x = params.b * u_minus / params.a;
    if (params.variant == Variant::ProductionInhibition) {
      // preadapted drive q = c*u_minus/x0 = c*a/b regardless of the level
      const double q = params.c * params.a / params.b;
      const double y_hi = (q + params.V) / params.delta * 1.02;
      const auto roots = find_positive_roots(
          [&](double y) { return q + reaction_term_f(params, y); }, y_hi);
      double y_sel = -1.0;
      for (double r : roots) {
        const double fp = -params.delta + hill_term_derivative(params, r);
        if (fp < 0.0) {
          y_sel = r;
          break;  // roots ascend; first stable is the lowest
        }
      }
      if (y_sel < 0.0) {
        throw ValidationError(
            "no stable preadapted level exists for these parameters");
      }
      start.y = y_sel;
    } else {
      // c*u - delta*x*y = 0 at x0 = b*u_minus/a
      start.y = params.c * params.a / (params.delta * params.b);
    }
  }
  start.w = std::log(u_minus);

  const InputSignal input = InputSignal::step(u_minus, u_plus, 0.0);
  Trajectory traj = integrate(params, start, input, config);

  StepResponse resp;
  resp.y_pre = start.y;
  resp.trajectory = std::move(traj);
  resp.y_final = resp.trajectory.y.back();
  resp.q_peak = 0.0;
  for (std::size_t i = 0; i < resp.trajectory.size(); ++i) {
    if (resp.trajectory.t[i] >= 0.0) {
      resp.q_peak = std::max(resp.q_peak, resp.trajectory.q[i]);
    }
  }
  return resp;
}

}  // namespace iffl

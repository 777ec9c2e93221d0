#pragma once

#include <optional>
#include <utility>
#include <vector>

namespace iffl {

/// How the controller species y is removed and how the loop input acts on it.
/// ProductionInhibition: y' = c*u/x - delta*y (+ optional autocatalysis).
/// Degradation:          y' = c*u - delta*x*y (no autocatalysis supported).
enum class Variant { ProductionInhibition, Degradation };

/// Rate constants of the feedforward/feedback loop
///   x' = -a*x + b*u
///   y' = (variant, see above)
///   u' = (lambda - kappa*y) * u        [closed loop]
/// with optional autocatalytic production V*y^n/(K^n + y^n) of y.
struct ModelParams {
  double a = 1.0;
  double b = 1.0;
  double c = 1.0;
  double delta = 1.0;
  double kappa = 1.0;
  double lambda = 0.0;
  double V = 0.0;  // 0 disables autocatalysis
  double K = 1.0;
  double n = 2.0;  // Hill exponent, n >= 1, non-integer allowed
  Variant variant = Variant::ProductionInhibition;

  [[nodiscard]] bool autocatalytic() const { return V > 0.0; }
};

/// Throws ValidationError unless a,b,c,delta,kappa,K > 0, V >= 0, n >= 1,
/// everything finite, and autocatalysis is absent for the Degradation variant.
void validate(const ModelParams& params);

/// Closed-loop state. u is carried as w = ln(u) so that exponential growth or
/// decay of u never leaves the representable range.
struct FullState {
  double x = 1.0;
  double y = 1.0;
  double w = 0.0;
};

/// State of the reduced planar system in p = u/x.
struct ReducedState {
  double p = 1.0;
  double y = 1.0;
};

struct FullDeriv {
  double dx, dy, dw;
};
struct ReducedDeriv {
  double dp, dy;
};

/// Time course of the loop input u(t) for open-loop experiments. All factories
/// validate positivity of u; v(t) is the exact log-derivative d/dt ln u,
/// right-continuous at jumps and kinks.
class InputSignal {
 public:
  enum class Kind { Constant, Linear, Exponential, Step, Sampled };

  static InputSignal constant(double alpha);
  /// u(t) = alpha + beta*t; the caller must keep the horizon inside u > 0,
  /// which validate() checks.
  static InputSignal linear(double alpha, double beta);
  /// u(t) = beta * exp(mu*t)
  static InputSignal exponential(double beta, double mu);
  /// u jumps from u_minus to u_plus at t_step; integrators restart there.
  static InputSignal step(double u_minus, double u_plus, double t_step);
  /// Piecewise log-linear interpolation through (t, u) samples; v is the
  /// per-segment slope of ln u. Held constant outside the table range.
  static InputSignal sampled(std::vector<std::pair<double, double>> table);

  [[nodiscard]] Kind kind() const { return kind_; }
  [[nodiscard]] double u(double t) const;
  [[nodiscard]] double log_u(double t) const;
  [[nodiscard]] double v(double t) const;
  [[nodiscard]] std::vector<double> discontinuities() const;
  /// Asymptotic exponential rate mu = lim v(t) when the family defines one.
  [[nodiscard]] std::optional<double> asymptotic_mu() const;
  /// Throws ValidationError if u is not strictly positive on [t0, t1].
  void validate(double t0, double t1) const;

  [[nodiscard]] double step_u_minus() const { return p1_; }
  [[nodiscard]] double step_u_plus() const { return p2_; }

  // Raw family parameters, exposed for config serialization.
  [[nodiscard]] double param1() const { return p1_; }
  [[nodiscard]] double param2() const { return p2_; }
  [[nodiscard]] double param3() const { return p3_; }
  [[nodiscard]] const std::vector<std::pair<double, double>>& table() const {
    return table_;
  }

 private:
  InputSignal(Kind kind, double p1, double p2, double p3)
      : kind_(kind), p1_(p1), p2_(p2), p3_(p3) {}
  explicit InputSignal(std::vector<std::pair<double, double>> table);

  Kind kind_;
  double p1_ = 0.0, p2_ = 0.0, p3_ = 0.0;     // meaning depends on kind
  std::vector<double> times_, log_us_;        // Sampled only
  std::vector<std::pair<double, double>> table_;  // Sampled only, as given
};

/// V*y^n / (K^n + y^n); 0 when V == 0.
double hill_term(const ModelParams& params, double y);
/// d/dy of hill_term; finite for all y >= 0 given n >= 1.
double hill_term_derivative(const ModelParams& params, double y);
/// Net self-dynamics of y without the feed q = c*u/x:
/// f(y) = -delta*y + V*y^n/(K^n + y^n).
double reaction_term_f(const ModelParams& params, double y);

/// Closed loop when input == nullptr (u = exp(w), w' = lambda - kappa*y),
/// open loop otherwise (u = input->u(t), w' = input->v(t)).
/// Throws NumericalError on non-finite state.
FullDeriv rhs_full(const ModelParams& params, const FullState& s, double t,
                   const InputSignal* input = nullptr);

/// Closed-loop planar reduction, ProductionInhibition only:
///   p' = p*(a + lambda - kappa*y - b*p),  y' = c*p - delta*y + hill.
ReducedDeriv rhs_reduced(const ModelParams& params, const ReducedState& s);

/// Open-loop p equation p' = p*(a + v - b*p) for a prescribed log-slope v.
double rhs_open_loop_p(const ModelParams& params, double p, double v);

/// Reduced system driven by an external v(t) instead of the feedback law.
ReducedDeriv rhs_reduced_open(const ModelParams& params, const ReducedState& s,
                              double v);

/// original = scale * normalized, componentwise; t = t_scale * t_normalized.
/// u (and hence w) is never rescaled.
struct ScalingRecord {
  double x_scale = 1.0;
  double y_scale = 1.0;
  double t_scale = 1.0;

  [[nodiscard]] FullState to_normalized(const FullState& s) const {
    return {s.x / x_scale, s.y / y_scale, s.w};
  }
  [[nodiscard]] FullState from_normalized(const FullState& s) const {
    return {s.x * x_scale, s.y * y_scale, s.w};
  }
  [[nodiscard]] double time_to_normalized(double t) const { return t / t_scale; }
  [[nodiscard]] double time_from_normalized(double tn) const { return tn * t_scale; }
};

struct NormalizedModel {
  ModelParams params;  // a = b = c = 1
  ScalingRecord scaling;
};

/// Rescale state and time so that a = b = c = 1 while the closed-loop
/// dynamics are unchanged. ProductionInhibition: delta/a, lambda/a,
/// c*kappa/(a*b). Degradation: b*delta/a^2, lambda/a, c*kappa/a^2.
/// Throws ValidationError for autocatalytic models (V > 0), which this
/// family of substitutions cannot reduce.
NormalizedModel normalize_params(const ModelParams& params);

/// Simulated fate of u in a closed-loop run.
enum class Outcome { Elimination, Proliferation, Marginal };

const char* to_string(Outcome o);
const char* to_string(Variant v);

}  // namespace iffl

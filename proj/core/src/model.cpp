#include "iffl/model.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "iffl/errors.hpp"

namespace iffl {

namespace {

bool finite(double v) { return std::isfinite(v); }

void require(bool cond, const std::string& what) {
  if (!cond) throw ValidationError(what);
}

}  // namespace

void validate(const ModelParams& p) {
  for (double v : {p.a, p.b, p.c, p.delta, p.kappa, p.lambda, p.V, p.K, p.n}) {
    require(finite(v), "model parameter is not finite");
  }
  require(p.a > 0.0, "a must be > 0");
  require(p.b > 0.0, "b must be > 0");
  require(p.c > 0.0, "c must be > 0");
  require(p.delta > 0.0, "delta must be > 0");
  require(p.kappa > 0.0, "kappa must be > 0");
  require(p.K > 0.0, "K must be > 0");
  require(p.V >= 0.0, "V must be >= 0");
  require(p.n >= 1.0, "n must be >= 1");
  require(!(p.variant == Variant::Degradation && p.V > 0.0),
          "autocatalysis is not defined for the Degradation variant");
}

double hill_term(const ModelParams& params, double y) {
  if (params.V == 0.0) return 0.0;
  if (y <= 0.0) return 0.0;
  const double yn = std::pow(y, params.n);
  const double kn = std::pow(params.K, params.n);
  return params.V * yn / (kn + yn);
}

double hill_term_derivative(const ModelParams& params, double y) {
  if (params.V == 0.0) return 0.0;
  const double kn = std::pow(params.K, params.n);
  if (y <= 0.0) {
    // n*y^(n-1) -> 0 for n > 1 and -> 1 for n = 1 as y -> 0+
    return params.n == 1.0 ? params.V / params.K : 0.0;
  }
  const double yn = std::pow(y, params.n);
  const double denom = kn + yn;
  return params.V * params.n * std::pow(y, params.n - 1.0) * kn / (denom * denom);
}

double reaction_term_f(const ModelParams& params, double y) {
  return -params.delta * y + hill_term(params, y);
}

FullDeriv rhs_full(const ModelParams& params, const FullState& s, double t,
                   const InputSignal* input) {
  if (!finite(s.x) || !finite(s.y) || !finite(s.w)) {
    throw NumericalError("rhs_full: non-finite state");
  }
  const double u = input ? input->u(t) : std::exp(s.w);
  FullDeriv d{};
  d.dx = -params.a * s.x + params.b * u;
  if (params.variant == Variant::ProductionInhibition) {
    d.dy = params.c * u / s.x - params.delta * s.y + hill_term(params, s.y);
  } else {
    d.dy = params.c * u - params.delta * s.x * s.y;
  }
  d.dw = input ? input->v(t) : (params.lambda - params.kappa * s.y);
  return d;
}

ReducedDeriv rhs_reduced(const ModelParams& params, const ReducedState& s) {
  if (params.variant != Variant::ProductionInhibition) {
    throw ValidationError(
        "rhs_reduced: the Degradation variant has no homogeneous reduction");
  }
  if (!finite(s.p) || !finite(s.y)) {
    throw NumericalError("rhs_reduced: non-finite state");
  }
  ReducedDeriv d{};
  d.dp = s.p * (params.a + params.lambda - params.kappa * s.y - params.b * s.p);
  d.dy = params.c * s.p - params.delta * s.y + hill_term(params, s.y);
  return d;
}

double rhs_open_loop_p(const ModelParams& params, double p, double v) {
  return p * (params.a + v - params.b * p);
}

ReducedDeriv rhs_reduced_open(const ModelParams& params, const ReducedState& s,
                              double v) {
  if (params.variant != Variant::ProductionInhibition) {
    throw ValidationError(
        "rhs_reduced_open: the Degradation variant has no homogeneous reduction");
  }
  ReducedDeriv d{};
  d.dp = rhs_open_loop_p(params, s.p, v);
  d.dy = params.c * s.p - params.delta * s.y + hill_term(params, s.y);
  return d;
}

NormalizedModel normalize_params(const ModelParams& params) {
  validate(params);
  if (params.autocatalytic()) {
    throw ValidationError(
        "normalize_params: no rescaling family is defined with autocatalysis");
  }
  NormalizedModel out;
  out.params = params;
  out.params.a = 1.0;
  out.params.b = 1.0;
  out.params.c = 1.0;
  out.params.lambda = params.lambda / params.a;
  out.scaling.t_scale = 1.0 / params.a;
  out.scaling.x_scale = params.b / params.a;
  if (params.variant == Variant::ProductionInhibition) {
    out.params.delta = params.delta / params.a;
    out.params.kappa = params.c * params.kappa / (params.a * params.b);
    out.scaling.y_scale = params.c / params.b;
  } else {
    out.params.delta = params.b * params.delta / (params.a * params.a);
    out.params.kappa = params.c * params.kappa / (params.a * params.a);
    out.scaling.y_scale = params.c / params.a;
  }
  return out;
}

// ---------------------------------------------------------------------------
// InputSignal

InputSignal InputSignal::constant(double alpha) {
  if (!(alpha > 0.0) || !finite(alpha)) {
    throw ValidationError("constant input requires alpha > 0");
  }
  return InputSignal(Kind::Constant, alpha, 0.0, 0.0);
}

InputSignal InputSignal::linear(double alpha, double beta) {
  if (!(alpha > 0.0) || !finite(alpha) || !finite(beta)) {
    throw ValidationError("linear input requires alpha > 0 and finite beta");
  }
  return InputSignal(Kind::Linear, alpha, beta, 0.0);
}

InputSignal InputSignal::exponential(double beta, double mu) {
  if (!(beta > 0.0) || !finite(beta) || !finite(mu)) {
    throw ValidationError("exponential input requires beta > 0 and finite mu");
  }
  return InputSignal(Kind::Exponential, beta, mu, 0.0);
}

InputSignal InputSignal::step(double u_minus, double u_plus, double t_step) {
  if (!(u_minus > 0.0) || !(u_plus > 0.0) || !finite(t_step)) {
    throw ValidationError("step input requires u_minus > 0 and u_plus > 0");
  }
  return InputSignal(Kind::Step, u_minus, u_plus, t_step);
}

InputSignal::InputSignal(std::vector<std::pair<double, double>> table)
    : kind_(Kind::Sampled) {
  if (table.size() < 2) {
    throw ValidationError("sampled input needs at least two (t, u) rows");
  }
  times_.reserve(table.size());
  log_us_.reserve(table.size());
  for (const auto& [t, u] : table) {
    if (!finite(t) || !(u > 0.0) || !finite(u)) {
      throw ValidationError("sampled input rows must be finite with u > 0");
    }
    if (!times_.empty() && t <= times_.back()) {
      throw ValidationError("sampled input times must be strictly increasing");
    }
    times_.push_back(t);
    log_us_.push_back(std::log(u));
  }
  table_ = std::move(table);
}

InputSignal InputSignal::sampled(std::vector<std::pair<double, double>> table) {
  return InputSignal(std::move(table));
}

double InputSignal::log_u(double t) const {
  switch (kind_) {
    case Kind::Constant:
      return std::log(p1_);
    case Kind::Linear:
      return std::log(p1_ + p2_ * t);
    case Kind::Exponential:
      return std::log(p1_) + p2_ * t;
    case Kind::Step:
      return std::log(t < p3_ ? p1_ : p2_);
    case Kind::Sampled: {
      if (t <= times_.front()) return log_us_.front();
      if (t >= times_.back()) return log_us_.back();
      const auto it = std::upper_bound(times_.begin(), times_.end(), t);
      const std::size_t i = static_cast<std::size_t>(it - times_.begin()) - 1;
      const double frac = (t - times_[i]) / (times_[i + 1] - times_[i]);
      return log_us_[i] + frac * (log_us_[i + 1] - log_us_[i]);
    }
  }
  return 0.0;  // unreachable
}

double InputSignal::u(double t) const {
  if (kind_ == Kind::Constant) return p1_;
  if (kind_ == Kind::Linear) return p1_ + p2_ * t;
  if (kind_ == Kind::Step) return t < p3_ ? p1_ : p2_;
  return std::exp(log_u(t));
}

double InputSignal::v(double t) const {
  switch (kind_) {
    case Kind::Constant:
      return 0.0;
    case Kind::Linear:
      return p2_ / (p1_ + p2_ * t);
    case Kind::Exponential:
      return p2_;
    case Kind::Step:
      return 0.0;
    case Kind::Sampled: {
      if (t < times_.front() || t >= times_.back()) return 0.0;
      auto it = std::upper_bound(times_.begin(), times_.end(), t);
      const std::size_t i = static_cast<std::size_t>(it - times_.begin()) - 1;
      return (log_us_[i + 1] - log_us_[i]) / (times_[i + 1] - times_[i]);
    }
  }
  return 0.0;  // unreachable
}

std::vector<double> InputSignal::discontinuities() const {
  if (kind_ == Kind::Step) return {p3_};
  return {};
}

std::optional<double> InputSignal::asymptotic_mu() const {
  switch (kind_) {
    case Kind::Constant:
    case Kind::Linear:
    case Kind::Step:
      return 0.0;
    case Kind::Exponential:
      return p2_;
    case Kind::Sampled:
      return std::nullopt;
  }
  return std::nullopt;  // unreachable
}

void InputSignal::validate(double t0, double t1) const {
  if (kind_ == Kind::Linear) {
    // positivity on a line only needs the endpoints
    if (p1_ + p2_ * t0 <= 0.0 || p1_ + p2_ * t1 <= 0.0) {
      throw ValidationError("linear input becomes non-positive on the horizon");
    }
  }
  // other families are positive by construction
  (void)t0;
  (void)t1;
}

const char* to_string(Outcome o) {
  switch (o) {
    case Outcome::Elimination:
      return "Elimination";
    case Outcome::Proliferation:
      return "Proliferation";
    case Outcome::Marginal:
      return "Marginal";
  }
  return "?";
}

const char* to_string(Variant v) {
  return v == Variant::ProductionInhibition ? "ProductionInhibition"
                                            : "Degradation";
}

}  // namespace iffl

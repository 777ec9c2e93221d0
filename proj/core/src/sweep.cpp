#include "iffl/sweep.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <string>
#include <thread>

#include "iffl/equilibrium.hpp"
#include "iffl/errors.hpp"

namespace iffl {

const char* to_string(SweepMethod m) {
  switch (m) {
    case SweepMethod::Algebraic:
      return "Algebraic";
    case SweepMethod::Simulation:
      return "Simulation";
    case SweepMethod::Both:
      return "Both";
  }
  return "?";
}

const char* to_string(CellLabel l) {
  switch (l) {
    case CellLabel::Elimination:
      return "Elimination";
    case CellLabel::Proliferation:
      return "Proliferation";
    case CellLabel::Marginal:
      return "Marginal";
    case CellLabel::Indeterminate:
      return "Indeterminate";
  }
  return "?";
}

CellLabel to_cell_label(Outcome o) {
  switch (o) {
    case Outcome::Elimination:
      return CellLabel::Elimination;
    case Outcome::Proliferation:
      return CellLabel::Proliferation;
    case Outcome::Marginal:
      return CellLabel::Marginal;
  }
  return CellLabel::Indeterminate;
}

double SweepAxis::value_at(std::size_t i) const {
  if (count <= 1) return min;
  return min + (max - min) * static_cast<double>(i) /
                   static_cast<double>(count - 1);
}

namespace {

constexpr const char* kSweepableParams[] = {"a",      "b", "c", "delta",
                                            "kappa",  "lambda",
                                            "V",      "K", "n"};

bool known_param(const std::string& name) {
  for (const char* p : kSweepableParams) {
    if (name == p) return true;
  }
  return false;
}

}  // namespace

void validate_axis(const SweepAxis& axis, bool allow_single) {
  if (!known_param(axis.param)) {
    throw ValidationError("unknown sweep parameter '" + axis.param + "'");
  }
  if (!std::isfinite(axis.min) || !std::isfinite(axis.max)) {
    throw ValidationError("sweep axis range must be finite");
  }
  if (axis.count < (allow_single ? 1u : 2u)) {
    throw ValidationError("sweep axis needs at least " +
                          std::string(allow_single ? "1 point" : "2 points"));
  }
  if (axis.count > 1 && !(axis.min < axis.max)) {
    throw ValidationError("sweep axis needs min < max");
  }
}

namespace {

void apply_param(ModelParams& params, const std::string& name, double value) {
  if (name == "a") params.a = value;
  else if (name == "b") params.b = value;
  else if (name == "c") params.c = value;
  else if (name == "delta") params.delta = value;
  else if (name == "kappa") params.kappa = value;
  else if (name == "lambda") params.lambda = value;
  else if (name == "V") params.V = value;
  else if (name == "K") params.K = value;
  else if (name == "n") params.n = value;
  else throw ValidationError("unknown sweep parameter '" + name + "'");
  // names are pre-checked by validate_axis; the throw above only guards
  // direct callers
}

// mu values of the interior equilibria (or of the origin when it is the only
// equilibrium), via the closed form when V = 0.
std::vector<EquilibriumReport> algebraic_reports(const ModelParams& params) {
  if (params.autocatalytic()) return equilibria_autocat(params);
  return {closed_loop_equilibrium_linear(params)};
}

void fill_algebraic(SweepCell& cell, const ModelParams& params) {
  const auto reports = algebraic_reports(params);
  cell.mu_all.reserve(reports.size());
  for (const auto& r : reports) cell.mu_all.push_back(r.mu);
  if (reports.empty()) {
    cell.algebraic = CellLabel::Indeterminate;
    return;
  }
  if (reports.size() == 1) {
    cell.mu_selected = reports[0].mu;
    cell.has_mu = true;
    cell.algebraic = to_cell_label(reports[0].outcome);
    return;
  }
  // several interior roots: pick the unique stable one when there is one,
  // otherwise require sign agreement
  const EquilibriumReport* stable = nullptr;
  std::size_t n_stable = 0;
  for (const auto& r : reports) {
    if (r.stability == Stability::StableNodeFocus) {
      stable = &r;
      ++n_stable;
    }
  }
  if (n_stable == 1) {
    cell.mu_selected = stable->mu;
    cell.has_mu = true;
    cell.algebraic = to_cell_label(stable->outcome);
    return;
  }
  const Outcome first = reports[0].outcome;
  const bool agree = std::all_of(
      reports.begin(), reports.end(),
      [&](const EquilibriumReport& r) { return r.outcome == first; });
  if (agree) {
    cell.mu_selected = reports[0].mu;
    cell.has_mu = true;
    cell.algebraic = to_cell_label(first);
  } else {
    cell.algebraic = CellLabel::Indeterminate;
  }
}

void fill_simulated(SweepCell& cell, const ModelParams& params,
                    const SweepSpec& spec) {
  const Trajectory traj =
      integrate(params, spec.initial, std::nullopt, spec.integrator);
  double window = traj.meta.steady_window;
  if (window <= 0.0) window = (traj.t.back() - traj.t.front()) / 10.0;
  cell.w_slope = fit_w_slope(traj, window);
  cell.has_slope = true;
  cell.simulated = to_cell_label(classify_u_outcome(traj, spec.slope_tol));
}

SweepCell evaluate_cell(const ModelParams& base, const SweepSpec& spec,
                        double v1, double v2, bool has_v2) {
  SweepCell cell;
  cell.value1 = v1;
  cell.value2 = v2;
  ModelParams params = base;
  try {
    apply_param(params, spec.axis1.param, v1);
    if (has_v2) apply_param(params, spec.axis2->param, v2);
    validate(params);
  } catch (const ValidationError&) {
    cell.failed = true;
    return cell;
  }
  if (spec.method != SweepMethod::Simulation) {
    try {
      fill_algebraic(cell, params);
    } catch (const std::exception&) {
      cell.failed = true;
    }
  }
  if (spec.method != SweepMethod::Algebraic) {
    try {
      fill_simulated(cell, params, spec);
    } catch (const std::exception&) {
      cell.failed = true;
      cell.simulated = CellLabel::Indeterminate;
    }
  }
  // with both methods and an ambiguous root set, the simulation picks
  if (cell.has_slope && cell.mu_all.size() > 1) {
    double best = cell.mu_all[0];
    for (double m : cell.mu_all) {
      if (std::fabs(m - cell.w_slope) < std::fabs(best - cell.w_slope)) best = m;
    }
    cell.mu_selected = best;
    cell.has_mu = true;
  }
  return cell;
}

void parallel_fill(std::vector<SweepCell>& cells,
                   const std::function<SweepCell(std::size_t)>& job,
                   std::size_t threads) {
  const std::size_t n = cells.size();
  if (threads == 0) {
    threads = std::max(1u, std::min(8u, std::thread::hardware_concurrency()));
  }
  threads = std::min(threads, n == 0 ? std::size_t{1} : n);
  if (threads <= 1 || n < 4) {
    for (std::size_t i = 0; i < n; ++i) cells[i] = job(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (std::size_t k = 0; k < threads; ++k) {
    pool.emplace_back([&, k] {
      const std::size_t lo = n * k / threads;
      const std::size_t hi = n * (k + 1) / threads;
      for (std::size_t i = lo; i < hi; ++i) cells[i] = job(i);
    });
  }
  for (auto& th : pool) th.join();
}

CellLabel simulated_label_at(const ModelParams& base, const SweepSpec& spec,
                             double lambda_value) {
  const SweepCell cell = [&] {
    SweepSpec probe = spec;
    probe.method = SweepMethod::Simulation;
    return evaluate_cell(base, probe, lambda_value, 0.0, false);
  }();
  return cell.failed ? CellLabel::Indeterminate : cell.simulated;
}

}  // namespace

Heatmap heatmap(const ModelParams& params, const SweepSpec& spec) {
  validate(params);
  validate_axis(spec.axis1, true);
  if (spec.axis2) validate_axis(*spec.axis2, true);

  Heatmap grid;
  grid.axis1 = spec.axis1;
  grid.axis2 = spec.axis2;
  grid.method = spec.method;
  const std::size_t n1 = spec.axis1.count;
  const std::size_t n2 = spec.axis2 ? spec.axis2->count : 1;
  grid.cells.resize(n1 * n2);
  parallel_fill(
      grid.cells,
      [&](std::size_t idx) {
        const std::size_t i = idx / n2;
        const std::size_t j = idx % n2;
        const double v1 = spec.axis1.value_at(i);
        const double v2 = spec.axis2 ? spec.axis2->value_at(j) : 0.0;
        return evaluate_cell(params, spec, v1, v2, spec.axis2.has_value());
      },
      spec.threads);
  return grid;
}

LambdaSweepResult lambda_sweep(const ModelParams& params, const SweepSpec& spec) {
  validate(params);
  if (spec.axis1.param != "lambda") {
    throw ValidationError("lambda_sweep expects axis1 over lambda");
  }
  if (spec.axis2) {
    throw ValidationError("lambda_sweep is one-dimensional");
  }
  validate_axis(spec.axis1, false);

  LambdaSweepResult result;
  result.points.resize(spec.axis1.count);
  parallel_fill(
      result.points,
      [&](std::size_t i) {
        return evaluate_cell(params, spec, spec.axis1.value_at(i), 0.0, false);
      },
      spec.threads);

  const double lo = spec.axis1.min;
  const double hi = spec.axis1.max;

  if (spec.method != SweepMethod::Simulation) {
    BandReport band;
    band.method = SweepMethod::Algebraic;
    band.boundaries = switch_lambdas(params, lo, hi);
    // label each interval at its midpoint, then drop boundaries that do not
    // actually flip the label (tangential switches)
    std::vector<double> edges{lo};
    edges.insert(edges.end(), band.boundaries.begin(), band.boundaries.end());
    edges.push_back(hi);
    std::vector<CellLabel> labels;
    for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
      ModelParams mid = params;
      mid.lambda = 0.5 * (edges[i] + edges[i + 1]);
      SweepCell cell;
      try {
        fill_algebraic(cell, mid);
      } catch (const std::exception&) {
        cell.algebraic = CellLabel::Indeterminate;
      }
      labels.push_back(cell.algebraic);
    }
    std::vector<double> kept;
    std::vector<CellLabel> merged{labels.front()};
    for (std::size_t i = 0; i < band.boundaries.size(); ++i) {
      if (labels[i + 1] != merged.back()) {
        kept.push_back(band.boundaries[i]);
        merged.push_back(labels[i + 1]);
      }
    }
    band.boundaries = std::move(kept);
    band.labels = std::move(merged);
    result.algebraic = std::move(band);
  }

  if (spec.method != SweepMethod::Algebraic) {
    BandReport band;
    band.method = SweepMethod::Simulation;
    const double resolution = (hi - lo) * spec.boundary_resolution;

    // indices of grid points with a usable simulated label
    std::vector<std::size_t> usable;
    for (std::size_t i = 0; i < result.points.size(); ++i) {
      if (!result.points[i].failed &&
          result.points[i].simulated != CellLabel::Indeterminate) {
        usable.push_back(i);
      }
    }
    if (!usable.empty()) {
      band.labels.push_back(result.points[usable.front()].simulated);
      for (std::size_t k = 0; k + 1 < usable.size(); ++k) {
        const SweepCell& l = result.points[usable[k]];
        const SweepCell& r = result.points[usable[k + 1]];
        if (l.simulated == r.simulated) continue;
        double a = l.value1, b = r.value1;
        CellLabel la = l.simulated;
        while (b - a > resolution) {
          const double m = 0.5 * (a + b);
          const CellLabel lm = simulated_label_at(params, spec, m);
          if (lm == CellLabel::Indeterminate) break;
          if (lm == la) {
            a = m;
          } else {
            b = m;
          }
        }
        band.boundaries.push_back(0.5 * (a + b));
        band.labels.push_back(r.simulated);
      }
    }
    result.simulated = std::move(band);
  }
  return result;
}

std::vector<BandWidth> band_widths_from(const LambdaSweepResult& sweep,
                                        const SweepSpec& spec) {
  const BandReport* band = nullptr;
  if (sweep.simulated && !sweep.simulated->labels.empty()) {
    band = &*sweep.simulated;
  } else if (sweep.algebraic) {
    band = &*sweep.algebraic;
  }
  std::vector<BandWidth> out;
  if (!band || band->labels.empty()) return out;

  std::vector<double> edges{spec.axis1.min};
  edges.insert(edges.end(), band->boundaries.begin(), band->boundaries.end());
  edges.push_back(spec.axis1.max);
  for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
    BandWidth w;
    w.label = band->labels[i];
    w.lo = edges[i];
    w.hi = edges[i + 1];
    w.bounded = i > 0 && i + 2 < edges.size();
    // edge bands extend past the scanned range: fold-width unknown, and a
    // ratio across lo <= 0 is meaningless either way
    w.fold = w.bounded && w.lo > 0.0
                 ? w.hi / w.lo
                 : std::numeric_limits<double>::infinity();
    out.push_back(w);
  }
  return out;
}

std::vector<BandWidth> band_width_report(const ModelParams& params,
                                         const SweepSpec& spec) {
  return band_widths_from(lambda_sweep(params, spec), spec);
}

}  // namespace iffl

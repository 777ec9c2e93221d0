#include "iffl/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "json.hpp"

#include "iffl/errors.hpp"
#include "iffl/rootfind.hpp"
#include "iffl/version.hpp"

namespace iffl {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

namespace {

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write '" + path + "'");
  return out;
}

// JSON has no inf/nan; overflowing values serialize as null.
std::string json_num(double v) {
  return std::isfinite(v) ? format_double(v) : std::string("null");
}

}  // namespace

void write_trajectory_csv(const std::string& path, const Trajectory& traj) {
  auto out = open_out(path);
  out << "t,x,y,u,p,v,q\n";
  const bool full = traj.kind == StateKind::Full;
  for (std::size_t i = 0; i < traj.size(); ++i) {
    out << format_double(traj.t[i]) << ',';
    if (full) out << format_double(traj.x[i]);
    out << ',' << format_double(traj.y[i]) << ',';
    if (full) out << format_double(std::exp(traj.w[i]));
    out << ',' << format_double(traj.p[i]) << ',' << format_double(traj.v[i])
        << ',' << format_double(traj.q[i]) << '\n';
  }
}

void write_trajectory_jsonl(const std::string& path, const Trajectory& traj) {
  auto out = open_out(path);
  const bool full = traj.kind == StateKind::Full;
  for (std::size_t i = 0; i < traj.size(); ++i) {
    out << "{\"t\":" << json_num(traj.t[i]);
    if (full) {
      // u can overflow to inf for growing populations; ln_u never does.
      out << ",\"x\":" << json_num(traj.x[i])
          << ",\"u\":" << json_num(std::exp(traj.w[i]))
          << ",\"ln_u\":" << json_num(traj.w[i]);
    }
    out << ",\"y\":" << json_num(traj.y[i]) << ",\"p\":" << json_num(traj.p[i])
        << ",\"v\":" << json_num(traj.v[i]) << ",\"q\":" << json_num(traj.q[i])
        << "}\n";
  }
}

void write_equilibria_jsonl(const std::string& path,
                            const std::vector<EquilibriumReport>& reports) {
  auto out = open_out(path);
  for (const auto& r : reports) {
    out << "{\"p_bar\":" << json_num(r.p_bar) << ",\"y_bar\":"
        << json_num(r.y_bar) << ",\"mu\":" << json_num(r.mu)
        << ",\"jacobian_trace\":" << json_num(r.jacobian.trace())
        << ",\"jacobian_det\":" << json_num(r.jacobian.det())
        << ",\"stability\":\"" << to_string(r.stability) << "\",\"outcome\":\""
        << to_string(r.outcome) << "\",\"source\":\"" << to_string(r.source)
        << "\"}\n";
  }
}

void write_grid_csv(const std::string& path, const Heatmap& grid) {
  auto out = open_out(path);
  out << "# axis1: " << grid.axis1.param
      << " min=" << format_double(grid.axis1.min)
      << " max=" << format_double(grid.axis1.max)
      << " count=" << grid.axis1.count << "\n";
  if (grid.axis2) {
    out << "# axis2: " << grid.axis2->param
        << " min=" << format_double(grid.axis2->min)
        << " max=" << format_double(grid.axis2->max)
        << " count=" << grid.axis2->count << "\n";
  }
  out << "# method: " << to_string(grid.method) << "\n";
  out << grid.axis1.param;
  if (grid.axis2) out << ',' << grid.axis2->param;
  out << ",mu,mu_all,algebraic,w_slope,simulated,failed\n";

  const bool has_algebraic = grid.method != SweepMethod::Simulation;
  const bool has_simulated = grid.method != SweepMethod::Algebraic;
  for (const auto& cell : grid.cells) {
    out << format_double(cell.value1);
    if (grid.axis2) out << ',' << format_double(cell.value2);
    out << ',';
    if (cell.has_mu) out << format_double(cell.mu_selected);
    out << ',';
    for (std::size_t i = 0; i < cell.mu_all.size(); ++i) {
      if (i) out << '|';
      out << format_double(cell.mu_all[i]);
    }
    out << ',';
    if (has_algebraic) out << to_string(cell.algebraic);
    out << ',';
    if (cell.has_slope) out << format_double(cell.w_slope);
    out << ',';
    if (has_simulated) out << to_string(cell.simulated);
    out << ',' << (cell.failed ? "true" : "false") << '\n';
  }
}

void write_nullclines_csv(const std::string& path, const ModelParams& params,
                          double p_max, std::size_t samples) {
  validate(params);
  if (!(p_max > 0.0) || !std::isfinite(p_max)) {
    throw ValidationError("phase.p_max must be positive and finite");
  }
  if (samples < 2) {
    throw ValidationError("phase.samples must be at least 2");
  }
  auto out = open_out(path);
  out << "component,p,y\n";

  const double al = params.a + params.lambda;
  const double y_line_top = al > 0.0 ? al / params.kappa : 0.0;
  const double y_null_top = (params.c * p_max + params.V) / params.delta;
  const double y_top = 1.02 * std::max(y_line_top, y_null_top);

  // the p-axis itself is always a p-nullcline component
  for (std::size_t i = 0; i < samples; ++i) {
    const double y = y_top * static_cast<double>(i) /
                     static_cast<double>(samples - 1);
    out << "p_null_axis," << format_double(0.0) << ',' << format_double(y)
        << '\n';
  }

  if (al > 0.0) {
    const double p_line_max = std::min(p_max, al / params.b);
    for (std::size_t i = 0; i < samples; ++i) {
      const double p = p_line_max * static_cast<double>(i) /
                       static_cast<double>(samples - 1);
      const double y = (al - params.b * p) / params.kappa;
      out << "p_null_line," << format_double(p) << ',' << format_double(y)
          << '\n';
    }
  }

  // y-nullcline c*p + f(y) = 0 solved per p; rows per root (up to three
  // branches when the Hill term folds the curve).
  for (std::size_t i = 1; i <= samples; ++i) {
    const double p = p_max * static_cast<double>(i) /
                     static_cast<double>(samples);
    const double hi = (params.c * p + params.V) / params.delta * 1.02;
    const auto roots = find_positive_roots(
        [&](double y) { return params.c * p + reaction_term_f(params, y); },
        hi);
    for (double y : roots) {
      out << "y_null," << format_double(p) << ',' << format_double(y) << '\n';
    }
  }
}

void write_limits_jsonl(const std::string& path, const PYLimits& limits,
                        const ModelParams& params,
                        const std::optional<double>& mu_input) {
  auto out = open_out(path);
  out << "{\"p_low\":" << json_num(limits.p_low)
      << ",\"p_high\":" << json_num(limits.p_high)
      << ",\"y_low\":" << json_num(limits.y_low)
      << ",\"y_high\":" << json_num(limits.y_high)
      << ",\"steady\":" << (limits.steady ? "true" : "false")
      << ",\"mu_input\":"
      << (mu_input ? json_num(*mu_input) : std::string("null"));
  if (mu_input && params.V == 0.0) {
    out << ",\"y_predicted\":"
        << json_num(open_loop_output_limit(params, *mu_input));
  } else {
    out << ",\"y_predicted\":null";
  }
  out << "}\n";
}

void write_bands_jsonl(const std::string& path, const LambdaSweepResult& result,
                       const std::vector<BandWidth>& widths) {
  auto out = open_out(path);
  const auto emit_band = [&out](const BandReport& band) {
    out << "{\"method\":\"" << to_string(band.method)
        << "\",\"boundaries\":[";
    for (std::size_t i = 0; i < band.boundaries.size(); ++i) {
      if (i) out << ',';
      out << json_num(band.boundaries[i]);
    }
    out << "],\"labels\":[";
    for (std::size_t i = 0; i < band.labels.size(); ++i) {
      if (i) out << ',';
      out << '"' << to_string(band.labels[i]) << '"';
    }
    out << "]}\n";
  };
  if (result.algebraic) emit_band(*result.algebraic);
  if (result.simulated) emit_band(*result.simulated);

  out << "{\"band_widths\":[";
  for (std::size_t i = 0; i < widths.size(); ++i) {
    const auto& w = widths[i];
    if (i) out << ',';
    out << "{\"label\":\"" << to_string(w.label) << "\",\"lo\":"
        << json_num(w.lo) << ",\"hi\":" << json_num(w.hi)
        << ",\"fold\":" << json_num(w.fold) << ",\"bounded\":"
        << (w.bounded ? "true" : "false") << '}';
  }
  out << "]}\n";
}

void write_manifest(const std::string& path, const ExperimentConfig& config) {
  auto out = open_out(path);
  nlohmann::json j;
  j["version"] = kVersion;
  j["experiment"] = to_string(config.experiment);
  j["config_text"] = serialize_config(config);
  out << j.dump() << "\n";
}

namespace {

Trajectory run_configured_trajectory(const ExperimentConfig& cfg) {
  if (cfg.state == StateKind::Full) {
    const FullState init{cfg.x0, cfg.y0, std::log(cfg.u0)};
    return integrate(cfg.model, init, cfg.input, cfg.run);
  }
  const ReducedState init{cfg.p0, cfg.y0};
  return integrate(cfg.model, init, cfg.input, cfg.run);
}

}  // namespace

std::vector<std::string> run_experiment(const ExperimentConfig& cfg) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(cfg.out_dir, ec);
  if (ec) {
    throw ValidationError("cannot create output directory '" + cfg.out_dir +
                          "': " + ec.message());
  }
  const auto path_for = [&cfg](const char* name) {
    return (fs::path(cfg.out_dir) / name).string();
  };

  std::vector<std::string> paths;
  const auto write_traj = [&](const Trajectory& traj) {
    if (cfg.format == OutputFormat::Jsonl) {
      const auto p = path_for("trajectory.jsonl");
      write_trajectory_jsonl(p, traj);
      paths.push_back(p);
    } else {
      const auto p = path_for("trajectory.csv");
      write_trajectory_csv(p, traj);
      paths.push_back(p);
    }
  };

  switch (cfg.experiment) {
    case Experiment::Simulate: {
      write_traj(run_configured_trajectory(cfg));
      break;
    }
    case Experiment::Step: {
      const FullState init{cfg.x0, cfg.y0, std::log(cfg.step_u_minus)};
      const auto resp =
          simulate_step_response(cfg.model, cfg.step_u_minus, cfg.step_u_plus,
                                 cfg.step_preadapt, cfg.run, init);
      write_traj(resp.trajectory);
      break;
    }
    case Experiment::Equilibria: {
      const auto p = path_for("equilibria.jsonl");
      write_equilibria_jsonl(p, closed_loop_equilibria(cfg.model));
      paths.push_back(p);
      break;
    }
    case Experiment::Limits: {
      const Trajectory traj = run_configured_trajectory(cfg);
      write_traj(traj);
      std::optional<double> mu;
      if (cfg.input) mu = cfg.input->asymptotic_mu();
      const auto p = path_for("limits.jsonl");
      write_limits_jsonl(p, estimate_p_y_limits(traj), cfg.model, mu);
      paths.push_back(p);
      break;
    }
    case Experiment::Sweep: {
      const auto result = lambda_sweep(cfg.model, cfg.sweep);
      Heatmap grid;
      grid.axis1 = cfg.sweep.axis1;
      grid.method = cfg.sweep.method;
      grid.cells = result.points;
      const auto gp = path_for("grid.csv");
      write_grid_csv(gp, grid);
      paths.push_back(gp);
      const auto bp = path_for("bands.jsonl");
      write_bands_jsonl(bp, result, band_widths_from(result, cfg.sweep));
      paths.push_back(bp);
      break;
    }
    case Experiment::Heatmap: {
      const auto p = path_for("grid.csv");
      write_grid_csv(p, heatmap(cfg.model, cfg.sweep));
      paths.push_back(p);
      break;
    }
    case Experiment::Phase: {
      double p_max = cfg.phase_p_max;
      if (p_max <= 0.0) {
        const double al = cfg.model.a + cfg.model.lambda;
        if (al <= 0.0) {
          throw ValidationError(
              "phase.p_max must be set explicitly when a + lambda <= 0");
        }
        p_max = 1.05 * al / cfg.model.b;
      }
      const auto np = path_for("nullclines.csv");
      write_nullclines_csv(np, cfg.model, p_max, cfg.phase_samples);
      paths.push_back(np);
      const auto ep = path_for("equilibria.jsonl");
      write_equilibria_jsonl(ep, closed_loop_equilibria(cfg.model));
      paths.push_back(ep);
      break;
    }
  }

  const auto mp = path_for("manifest.jsonl");
  write_manifest(mp, cfg);
  paths.push_back(mp);
  return paths;
}

}  // namespace iffl

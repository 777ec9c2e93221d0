#pragma once

#include <string>
#include <vector>

#include "iffl/config.hpp"
#include "iffl/equilibrium.hpp"
#include "iffl/integrate.hpp"
#include "iffl/sweep.hpp"

namespace iffl {

// Shortest round-trippable decimal form (17 significant digits).
std::string format_double(double v);

// Dispatches the configured experiment and writes its outputs (plus
// manifest.jsonl) into config.out_dir. Returns the paths written.
std::vector<std::string> run_experiment(const ExperimentConfig& config);

// Individual writers, exposed for tests.
void write_trajectory_csv(const std::string& path, const Trajectory& traj);
void write_trajectory_jsonl(const std::string& path, const Trajectory& traj);
void write_equilibria_jsonl(const std::string& path,
                            const std::vector<EquilibriumReport>& reports);
void write_grid_csv(const std::string& path, const Heatmap& grid);
void write_nullclines_csv(const std::string& path, const ModelParams& params,
                          double p_max, std::size_t samples);
void write_limits_jsonl(const std::string& path, const PYLimits& limits,
                        const ModelParams& params,
                        const std::optional<double>& mu_input);
void write_bands_jsonl(const std::string& path, const LambdaSweepResult& result,
                       const std::vector<BandWidth>& widths);
void write_manifest(const std::string& path, const ExperimentConfig& config);

}  // namespace iffl

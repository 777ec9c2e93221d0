#pragma once

#include <optional>
#include <string>

#include "iffl/integrate.hpp"
#include "iffl/model.hpp"
#include "iffl/sweep.hpp"

namespace iffl {

enum class Experiment { Simulate, Step, Equilibria, Limits, Sweep, Heatmap, Phase };
const char* to_string(Experiment e);
Experiment experiment_from_string(const std::string& name);

enum class OutputFormat { Csv, Jsonl };
const char* to_string(OutputFormat f);

// Resolved experiment description. Parsed from the line-oriented
// `section.key = value` format; unknown keys are rejected so typos cannot
// silently fall back to defaults.
struct ExperimentConfig {
  Experiment experiment = Experiment::Simulate;

  ModelParams model;
  std::optional<InputSignal> input;

  IntegratorConfig run;
  StateKind state = StateKind::Full;
  double x0 = 1.0;
  double y0 = 1.0;
  double u0 = 1.0;
  double p0 = 1.0;

  double step_u_minus = 1.0;
  double step_u_plus = 2.0;
  bool step_preadapt = true;

  SweepSpec sweep;

  double phase_p_max = 0.0;  // 0 = derived from (a+lambda)/b
  std::size_t phase_samples = 512;

  std::string out_dir = "out";
  OutputFormat format = OutputFormat::Csv;
};

// Throws ValidationError naming the offending line and key.
ExperimentConfig parse_config(const std::string& text);

// Canonical text form; parse_config(serialize_config(c)) resolves to an
// identical config. Blocks irrelevant to the experiment are omitted.
std::string serialize_config(const ExperimentConfig& config);

bool operator==(const ExperimentConfig& a, const ExperimentConfig& b);

// Reads a config file. A .jsonl manifest from an earlier run is accepted:
// its embedded config text is extracted, so runs can be replayed verbatim.
std::string load_config_text(const std::string& path);

}  // namespace iffl

#include <exception>
#include <iostream>
#include <sstream>
#include <string>

#include "CLI11.hpp"

#include "iffl/config.hpp"
#include "iffl/errors.hpp"
#include "iffl/experiment.hpp"
#include "iffl/version.hpp"

namespace {

struct Command {
  const char* name;
  const char* help;
};

constexpr Command kCommands[] = {
    {"simulate", "integrate the model and write the trajectory"},
    {"step", "open-loop step response with pre-adaptation"},
    {"equilibria", "closed-loop equilibria with stability and outcome labels"},
    {"limits", "empirical tail bounds of p and y along a trajectory"},
    {"sweep", "sweep lambda and report elimination/proliferation bands"},
    {"heatmap", "grid evaluation over one or two parameters"},
    {"phase", "nullclines and equilibria for phase-plane plots"},
};

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

// Whether the config text pins the experiment itself; if so it must agree
// with the subcommand instead of being silently overridden.
bool has_experiment_key(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    const auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    if (trim(line.substr(0, eq)) == "experiment") return true;
  }
  return false;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"incoherent feedforward loop simulation and analysis"};
  app.set_version_flag("--version", iffl::kVersion);
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  std::string format;
  std::string chosen;
  for (const auto& cmd : kCommands) {
    auto* sub = app.add_subcommand(cmd.name, cmd.help);
    sub->add_option("--config,-c", config_path,
                    "config file, or a manifest.jsonl to replay a run")
        ->required();
    sub->add_option("--out,-o", out_dir,
                    "output directory (overrides output.dir)");
    sub->add_option("--format,-f", format, "trajectory format")
        ->check(CLI::IsMember({"csv", "jsonl"}));
    sub->callback([&chosen, &cmd] { chosen = cmd.name; });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    const std::string text = iffl::load_config_text(config_path);
    iffl::ExperimentConfig cfg = iffl::parse_config(text);
    const iffl::Experiment cli_exp = iffl::experiment_from_string(chosen);
    if (has_experiment_key(text) && cfg.experiment != cli_exp) {
      throw iffl::ValidationError(
          std::string("config sets experiment = ") +
          iffl::to_string(cfg.experiment) + " but the command line asked for " +
          chosen);
    }
    cfg.experiment = cli_exp;
    if (!out_dir.empty()) cfg.out_dir = out_dir;
    if (!format.empty()) {
      cfg.format = format == "jsonl" ? iffl::OutputFormat::Jsonl
                                     : iffl::OutputFormat::Csv;
    }
    for (const auto& path : iffl::run_experiment(cfg)) {
      std::cout << path << "\n";
    }
    return 0;
  } catch (const iffl::NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

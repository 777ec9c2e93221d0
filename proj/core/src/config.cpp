#include "iffl/config.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>
#include <vector>

#include "json.hpp"

#include "iffl/errors.hpp"

namespace iffl {

const char* to_string(Experiment e) {
  switch (e) {
    case Experiment::Simulate:
      return "simulate";
    case Experiment::Step:
      return "step";
    case Experiment::Equilibria:
      return "equilibria";
    case Experiment::Limits:
      return "limits";
    case Experiment::Sweep:
      return "sweep";
    case Experiment::Heatmap:
      return "heatmap";
    case Experiment::Phase:
      return "phase";
  }
  return "?";
}

Experiment experiment_from_string(const std::string& name) {
  if (name == "simulate") return Experiment::Simulate;
  if (name == "step") return Experiment::Step;
  if (name == "equilibria") return Experiment::Equilibria;
  if (name == "limits") return Experiment::Limits;
  if (name == "sweep") return Experiment::Sweep;
  if (name == "heatmap") return Experiment::Heatmap;
  if (name == "phase") return Experiment::Phase;
  throw ValidationError("unknown experiment '" + name +
                        "' (expected simulate, step, equilibria, limits, "
                        "sweep, heatmap or phase)");
}

const char* to_string(OutputFormat f) {
  return f == OutputFormat::Csv ? "csv" : "jsonl";
}

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

struct KeyValue {
  std::string value;
  int line = 0;
};

// Line-oriented `section.key = value` store with single-use semantics: every
// key must be consumed, leftovers are typos.
class KvStore {
 public:
  explicit KvStore(const std::string& text) {
    std::istringstream in(text);
    std::string raw;
    int line_no = 0;
    while (std::getline(in, raw)) {
      ++line_no;
      const auto hash = raw.find('#');
      if (hash != std::string::npos) raw = raw.substr(0, hash);
      const std::string line = trim(raw);
      if (line.empty()) continue;
      const auto eq = line.find('=');
      if (eq == std::string::npos) {
        throw ValidationError("line " + std::to_string(line_no) +
                              ": expected `key = value`");
      }
      const std::string key = trim(line.substr(0, eq));
      const std::string value = trim(line.substr(eq + 1));
      if (key.empty() || value.empty()) {
        throw ValidationError("line " + std::to_string(line_no) +
                              ": empty key or value");
      }
      if (kv_.count(key)) {
        throw ValidationError("line " + std::to_string(line_no) +
                              ": duplicate key '" + key + "'");
      }
      kv_[key] = {value, line_no};
    }
  }

  bool has_section(const std::string& section) const {
    const std::string prefix = section + ".";
    for (const auto& [k, v] : kv_) {
      if (k.rfind(prefix, 0) == 0) return true;
    }
    return false;
  }

  std::optional<std::string> take(const std::string& key) {
    auto it = kv_.find(key);
    if (it == kv_.end()) return std::nullopt;
    last_line_ = it->second.line;
    std::string v = it->second.value;
    kv_.erase(it);
    return v;
  }

  double take_double(const std::string& key, double fallback) {
    const auto v = take(key);
    if (!v) return fallback;
    return parse_double(key, *v);
  }

  std::size_t take_size(const std::string& key, std::size_t fallback) {
    const double d = take_double(key, static_cast<double>(fallback));
    if (d < 0.0 || d != std::floor(d)) {
      throw ValidationError(context(key) + "expected a non-negative integer");
    }
    return static_cast<std::size_t>(d);
  }

  bool take_bool(const std::string& key, bool fallback) {
    const auto v = take(key);
    if (!v) return fallback;
    if (*v == "true") return true;
    if (*v == "false") return false;
    throw ValidationError(context(key) + "expected true or false");
  }

  double parse_double(const std::string& key, const std::string& text) const {
    const char* begin = text.c_str();
    char* end = nullptr;
    const double d = std::strtod(begin, &end);
    if (end == begin || *end != '\0') {
      throw ValidationError(context(key) + "'" + text + "' is not a number");
    }
    return d;
  }

  std::string context(const std::string& key) const {
    return "line " + std::to_string(last_line_) + ", key '" + key + "': ";
  }

  void reject_leftovers() const {
    if (kv_.empty()) return;
    const auto& [key, kv] = *kv_.begin();
    throw ValidationError("line " + std::to_string(kv.line) +
                          ": unknown key '" + key + "'");
  }

 private:
  std::map<std::string, KeyValue> kv_;
  int last_line_ = 0;
};

std::vector<double> parse_double_list(KvStore& kv, const std::string& key,
                                      const std::string& text) {
  std::vector<double> out;
  std::istringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    item = trim(item);
    if (item.empty()) continue;
    out.push_back(kv.parse_double(key, item));
  }
  return out;
}

InputSignal parse_input(KvStore& kv) {
  const auto kind = kv.take("input.kind");
  if (!kind) {
    throw ValidationError("input section present but input.kind is missing");
  }
  if (*kind == "constant") {
    return InputSignal::constant(kv.take_double("input.alpha", 1.0));
  }
  if (*kind == "linear") {
    return InputSignal::linear(kv.take_double("input.alpha", 1.0),
                               kv.take_double("input.beta", 0.0));
  }
  if (*kind == "exponential") {
    return InputSignal::exponential(kv.take_double("input.beta", 1.0),
                                    kv.take_double("input.mu", 0.0));
  }
  if (*kind == "step") {
    return InputSignal::step(kv.take_double("input.u_minus", 1.0),
                             kv.take_double("input.u_plus", 2.0),
                             kv.take_double("input.t_step", 0.0));
  }
  if (*kind == "sampled") {
    const auto table_text = kv.take("input.table");
    if (!table_text) {
      throw ValidationError("sampled input needs input.table = t:u, t:u, ...");
    }
    std::vector<std::pair<double, double>> table;
    std::istringstream in(*table_text);
    std::string item;
    while (std::getline(in, item, ',')) {
      item = trim(item);
      if (item.empty()) continue;
      const auto colon = item.find(':');
      if (colon == std::string::npos) {
        throw ValidationError("input.table entries must look like t:u, got '" +
                              item + "'");
      }
      table.emplace_back(
          kv.parse_double("input.table", trim(item.substr(0, colon))),
          kv.parse_double("input.table", trim(item.substr(colon + 1))));
    }
    return InputSignal::sampled(std::move(table));
  }
  throw ValidationError("unknown input.kind '" + *kind +
                        "' (expected constant, linear, exponential, step or "
                        "sampled)");
}

void require_positive(const std::string& key, double v) {
  if (!(v > 0.0) || !std::isfinite(v)) {
    throw ValidationError("key '" + key + "' must be positive and finite");
  }
}

}  // namespace

ExperimentConfig parse_config(const std::string& text) {
  KvStore kv(text);
  ExperimentConfig cfg;

  if (!kv.has_section("model")) {
    throw ValidationError("missing model section (no model.* keys found)");
  }

  if (const auto e = kv.take("experiment")) {
    cfg.experiment = experiment_from_string(*e);
  }

  cfg.model.a = kv.take_double("model.a", cfg.model.a);
  cfg.model.b = kv.take_double("model.b", cfg.model.b);
  cfg.model.c = kv.take_double("model.c", cfg.model.c);
  cfg.model.delta = kv.take_double("model.delta", cfg.model.delta);
  cfg.model.kappa = kv.take_double("model.kappa", cfg.model.kappa);
  cfg.model.lambda = kv.take_double("model.lambda", cfg.model.lambda);
  cfg.model.V = kv.take_double("model.V", cfg.model.V);
  cfg.model.K = kv.take_double("model.K", cfg.model.K);
  cfg.model.n = kv.take_double("model.n", cfg.model.n);
  if (const auto variant = kv.take("model.variant")) {
    if (*variant == "ProductionInhibition") {
      cfg.model.variant = Variant::ProductionInhibition;
    } else if (*variant == "Degradation") {
      cfg.model.variant = Variant::Degradation;
    } else {
      throw ValidationError("unknown model.variant '" + *variant + "'");
    }
  }
  if (const auto autocat = kv.take("model.autocatalysis")) {
    const bool flag = *autocat == "true";
    if (!flag && *autocat != "false") {
      throw ValidationError("model.autocatalysis expects true or false");
    }
    if (flag != cfg.model.autocatalytic()) {
      throw ValidationError(
          "model.autocatalysis contradicts model.V (V > 0 means true)");
    }
  }
  validate(cfg.model);

  if (kv.has_section("input")) {
    cfg.input = parse_input(kv);
  }

  cfg.run.rel_tol = kv.take_double("run.rel_tol", cfg.run.rel_tol);
  cfg.run.abs_tol = kv.take_double("run.abs_tol", cfg.run.abs_tol);
  cfg.run.t0 = kv.take_double("run.t0", cfg.run.t0);
  cfg.run.t_end = kv.take_double("run.t_end", cfg.run.t_end);
  cfg.run.max_step = kv.take_double("run.max_step", cfg.run.max_step);
  cfg.run.steady_window =
      kv.take_double("run.steady_window", cfg.run.steady_window);
  cfg.run.steady_tol = kv.take_double("run.steady_tol", cfg.run.steady_tol);
  cfg.run.divergence_guard =
      kv.take_double("run.divergence_guard", cfg.run.divergence_guard);
  cfg.run.max_steps = kv.take_size("run.max_steps", cfg.run.max_steps);
  if (const auto times = kv.take("run.output_times")) {
    cfg.run.output_times = parse_double_list(kv, "run.output_times", *times);
  }
  if (const auto state = kv.take("run.state")) {
    if (*state == "full") {
      cfg.state = StateKind::Full;
    } else if (*state == "reduced") {
      cfg.state = StateKind::Reduced;
    } else {
      throw ValidationError("run.state must be full or reduced");
    }
  }
  cfg.x0 = kv.take_double("run.x0", cfg.x0);
  cfg.y0 = kv.take_double("run.y0", cfg.y0);
  cfg.u0 = kv.take_double("run.u0", cfg.u0);
  cfg.p0 = kv.take_double("run.p0", cfg.p0);
  require_positive("run.x0", cfg.x0);
  require_positive("run.y0", cfg.y0);
  require_positive("run.u0", cfg.u0);
  require_positive("run.p0", cfg.p0);

  cfg.step_u_minus = kv.take_double("step.u_minus", cfg.step_u_minus);
  cfg.step_u_plus = kv.take_double("step.u_plus", cfg.step_u_plus);
  cfg.step_preadapt = kv.take_bool("step.preadapt", cfg.step_preadapt);

  cfg.sweep.axis1.param = kv.take("sweep.parameter").value_or("lambda");
  cfg.sweep.axis1.min = kv.take_double("sweep.min", 0.0);
  cfg.sweep.axis1.max = kv.take_double("sweep.max", 1.0);
  cfg.sweep.axis1.count = kv.take_size("sweep.count", 11);
  if (const auto p2 = kv.take("sweep.parameter2")) {
    SweepAxis axis2;
    axis2.param = *p2;
    axis2.min = kv.take_double("sweep.min2", 0.0);
    axis2.max = kv.take_double("sweep.max2", 1.0);
    axis2.count = kv.take_size("sweep.count2", 11);
    cfg.sweep.axis2 = axis2;
  }
  if (const auto method = kv.take("sweep.method")) {
    if (*method == "Algebraic") {
      cfg.sweep.method = SweepMethod::Algebraic;
    } else if (*method == "Simulation") {
      cfg.sweep.method = SweepMethod::Simulation;
    } else if (*method == "Both") {
      cfg.sweep.method = SweepMethod::Both;
    } else {
      throw ValidationError(
          "sweep.method must be Algebraic, Simulation or Both");
    }
  }
  cfg.sweep.threads = kv.take_size("sweep.threads", cfg.sweep.threads);
  cfg.sweep.boundary_resolution = kv.take_double(
      "sweep.boundary_resolution", cfg.sweep.boundary_resolution);
  cfg.sweep.slope_tol = kv.take_double("sweep.slope_tol", cfg.sweep.slope_tol);
  cfg.sweep.integrator = cfg.run;
  cfg.sweep.initial = FullState{cfg.x0, cfg.y0, std::log(cfg.u0)};

  cfg.phase_p_max = kv.take_double("phase.p_max", cfg.phase_p_max);
  cfg.phase_samples = kv.take_size("phase.samples", cfg.phase_samples);

  if (const auto dir = kv.take("output.dir")) cfg.out_dir = *dir;
  if (const auto fmt = kv.take("output.format")) {
    if (*fmt == "csv") {
      cfg.format = OutputFormat::Csv;
    } else if (*fmt == "jsonl") {
      cfg.format = OutputFormat::Jsonl;
    } else {
      throw ValidationError("output.format must be csv or jsonl");
    }
  }

  kv.reject_leftovers();
  return cfg;
}

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void emit_input(std::ostringstream& out, const InputSignal& in) {
  using Kind = InputSignal::Kind;
  switch (in.kind()) {
    case Kind::Constant:
      out << "input.kind = constant\n"
          << "input.alpha = " << fmt(in.param1()) << "\n";
      return;
    case Kind::Linear:
      out << "input.kind = linear\n"
          << "input.alpha = " << fmt(in.param1()) << "\n"
          << "input.beta = " << fmt(in.param2()) << "\n";
      return;
    case Kind::Exponential:
      out << "input.kind = exponential\n"
          << "input.beta = " << fmt(in.param1()) << "\n"
          << "input.mu = " << fmt(in.param2()) << "\n";
      return;
    case Kind::Step:
      out << "input.kind = step\n"
          << "input.u_minus = " << fmt(in.param1()) << "\n"
          << "input.u_plus = " << fmt(in.param2()) << "\n"
          << "input.t_step = " << fmt(in.param3()) << "\n";
      return;
    case Kind::Sampled: {
      out << "input.kind = sampled\n"
          << "input.table = ";
      const auto& table = in.table();
      for (std::size_t i = 0; i < table.size(); ++i) {
        if (i) out << ", ";
        out << fmt(table[i].first) << ":" << fmt(table[i].second);
      }
      out << "\n";
      return;
    }
  }
}

}  // namespace

std::string serialize_config(const ExperimentConfig& cfg) {
  std::ostringstream out;
  out << "experiment = " << to_string(cfg.experiment) << "\n";

  out << "model.a = " << fmt(cfg.model.a) << "\n"
      << "model.b = " << fmt(cfg.model.b) << "\n"
      << "model.c = " << fmt(cfg.model.c) << "\n"
      << "model.delta = " << fmt(cfg.model.delta) << "\n"
      << "model.kappa = " << fmt(cfg.model.kappa) << "\n"
      << "model.lambda = " << fmt(cfg.model.lambda) << "\n"
      << "model.V = " << fmt(cfg.model.V) << "\n"
      << "model.K = " << fmt(cfg.model.K) << "\n"
      << "model.n = " << fmt(cfg.model.n) << "\n"
      << "model.variant = " << to_string(cfg.model.variant) << "\n"
      << "model.autocatalysis = "
      << (cfg.model.autocatalytic() ? "true" : "false") << "\n";

  if (cfg.input) emit_input(out, *cfg.input);

  out << "run.rel_tol = " << fmt(cfg.run.rel_tol) << "\n"
      << "run.abs_tol = " << fmt(cfg.run.abs_tol) << "\n"
      << "run.t0 = " << fmt(cfg.run.t0) << "\n"
      << "run.t_end = " << fmt(cfg.run.t_end) << "\n"
      << "run.max_step = " << fmt(cfg.run.max_step) << "\n"
      << "run.steady_window = " << fmt(cfg.run.steady_window) << "\n"
      << "run.steady_tol = " << fmt(cfg.run.steady_tol) << "\n"
      << "run.divergence_guard = " << fmt(cfg.run.divergence_guard) << "\n"
      << "run.max_steps = " << cfg.run.max_steps << "\n";
  if (!cfg.run.output_times.empty()) {
    out << "run.output_times = ";
    for (std::size_t i = 0; i < cfg.run.output_times.size(); ++i) {
      if (i) out << ", ";
      out << fmt(cfg.run.output_times[i]);
    }
    out << "\n";
  }
  out << "run.state = " << (cfg.state == StateKind::Full ? "full" : "reduced")
      << "\n"
      << "run.x0 = " << fmt(cfg.x0) << "\n"
      << "run.y0 = " << fmt(cfg.y0) << "\n"
      << "run.u0 = " << fmt(cfg.u0) << "\n"
      << "run.p0 = " << fmt(cfg.p0) << "\n";

  if (cfg.experiment == Experiment::Step) {
    out << "step.u_minus = " << fmt(cfg.step_u_minus) << "\n"
        << "step.u_plus = " << fmt(cfg.step_u_plus) << "\n"
        << "step.preadapt = " << (cfg.step_preadapt ? "true" : "false") << "\n";
  }

  if (cfg.experiment == Experiment::Sweep ||
      cfg.experiment == Experiment::Heatmap) {
    out << "sweep.parameter = " << cfg.sweep.axis1.param << "\n"
        << "sweep.min = " << fmt(cfg.sweep.axis1.min) << "\n"
        << "sweep.max = " << fmt(cfg.sweep.axis1.max) << "\n"
        << "sweep.count = " << cfg.sweep.axis1.count << "\n";
    if (cfg.sweep.axis2) {
      out << "sweep.parameter2 = " << cfg.sweep.axis2->param << "\n"
          << "sweep.min2 = " << fmt(cfg.sweep.axis2->min) << "\n"
          << "sweep.max2 = " << fmt(cfg.sweep.axis2->max) << "\n"
          << "sweep.count2 = " << cfg.sweep.axis2->count << "\n";
    }
    out << "sweep.method = " << to_string(cfg.sweep.method) << "\n"
        << "sweep.threads = " << cfg.sweep.threads << "\n"
        << "sweep.boundary_resolution = " << fmt(cfg.sweep.boundary_resolution)
        << "\n"
        << "sweep.slope_tol = " << fmt(cfg.sweep.slope_tol) << "\n";
  }

  if (cfg.experiment == Experiment::Phase) {
    out << "phase.p_max = " << fmt(cfg.phase_p_max) << "\n"
        << "phase.samples = " << cfg.phase_samples << "\n";
  }

  out << "output.dir = " << cfg.out_dir << "\n"
      << "output.format = " << to_string(cfg.format) << "\n";
  return out.str();
}

bool operator==(const ExperimentConfig& a, const ExperimentConfig& b) {
  return serialize_config(a) == serialize_config(b);
}

std::string load_config_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw ValidationError("cannot read config file '" + path + "'");
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  std::string text = buf.str();

  const auto first = text.find_first_not_of(" \t\r\n");
  const bool looks_json = first != std::string::npos && text[first] == '{';
  if (!looks_json) return text;

  // a manifest from an earlier run: replay its embedded config
  const auto line_end = text.find('\n', first);
  const std::string line = text.substr(
      first, line_end == std::string::npos ? std::string::npos : line_end - first);
  try {
    const auto j = nlohmann::json::parse(line);
    if (!j.contains("config_text")) {
      throw ValidationError("manifest '" + path + "' has no config_text field");
    }
    return j.at("config_text").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError("cannot parse manifest '" + path + "': " + e.what());
  }
}

}  // namespace iffl

#include "chainlab/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

#include "chainlab/csv.hpp"
#include "chainlab/error.hpp"

namespace chainlab {

namespace pt = boost::property_tree;

namespace {

const std::vector<std::pair<Experiment, std::string>>& experiment_names() {
  static const std::vector<std::pair<Experiment, std::string>> names = {
      {Experiment::thermo, "thermo"},         {Experiment::sample, "sample"},
      {Experiment::evolve, "evolve"},         {Experiment::correlate, "correlate"},
      {Experiment::green_kubo, "green-kubo"}, {Experiment::modes, "modes"},
      {Experiment::bounds, "bounds"},         {Experiment::saddle, "saddle"},
      {Experiment::gap, "gap"},               {Experiment::check_fd, "check-fd"},
      {Experiment::invariance, "invariance"}};
  return names;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

class Reader {
 public:
  explicit Reader(const pt::ptree& tree) : tree_(tree) {}

  template <class T>
  void get(const std::string& path, T& out) {
    const auto node = tree_.get_optional<std::string>(path);
    seen_.insert(path);
    if (!node) return;
    parse(path, trim(*node), out);
  }

  template <class T>
  void get(const std::string& path, std::optional<T>& out) {
    const auto node = tree_.get_optional<std::string>(path);
    seen_.insert(path);
    if (!node) return;
    T value{};
    if (parse(path, trim(*node), value)) out = value;
  }

  void error(const std::string& msg) { errors_.push_back(msg); }

  void check_unknown() {
    for (const auto& [key, child] : tree_) {
      if (child.empty()) {
        if (!seen_.count(key)) error("unknown field '" + key + "'");
        continue;
      }
      for (const auto& [sub, leaf] : child)
        if (!seen_.count(key + "." + sub)) error("unknown field '" + key + "." + sub + "'");
    }
  }

  const std::vector<std::string>& errors() const { return errors_; }

 private:
  bool parse(const std::string& path, const std::string& text, double& out) {
    const auto res = std::from_chars(text.data(), text.data() + text.size(), out);
    if (res.ec != std::errc() || res.ptr != text.data() + text.size()) {
      error(path + ": expected a number, got '" + text + "'");
      return false;
    }
    return true;
  }
  template <class Int>
    requires std::is_integral_v<Int>
  bool parse(const std::string& path, const std::string& text, Int& out) {
    const auto res = std::from_chars(text.data(), text.data() + text.size(), out);
    if (res.ec != std::errc() || res.ptr != text.data() + text.size()) {
      error(path + ": expected an integer, got '" + text + "'");
      return false;
    }
    return true;
  }
  bool parse(const std::string&, const std::string& text, std::string& out) {
    out = text;
    return true;
  }
  bool parse(const std::string& path, const std::string& text, bool& out) {
    if (text == "true" || text == "1") out = true;
    else if (text == "false" || text == "0") out = false;
    else {
      error(path + ": expected true or false, got '" + text + "'");
      return false;
    }
    return true;
  }
  template <class Int>
  bool parse(const std::string& path, const std::string& text, std::vector<Int>& out) {
    out.clear();
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
      Int v{};
      if (!parse(path, trim(item), v)) return false;
      out.push_back(v);
    }
    if (out.empty()) {
      error(path + ": expected a comma separated list");
      return false;
    }
    return true;
  }

  const pt::ptree& tree_;
  std::set<std::string> seen_;
  std::vector<std::string> errors_;
};

template <class T>
std::string list_text(const std::vector<T>& v) {
  std::string out;
  for (std::size_t k = 0; k < v.size(); ++k) out += (k ? ", " : "") + std::to_string(v[k]);
  return out;
}

[[noreturn]] void raise(const std::vector<std::string>& errors) {
  std::string msg = "config error:";
  for (const auto& e : errors) msg += "\n  - " + e;
  throw ConfigError(msg);
}

}  // namespace

std::string to_string(Experiment e) {
  for (const auto& [k, name] : experiment_names())
    if (k == e) return name;
  return "unknown";
}

std::optional<Experiment> experiment_from_string(const std::string& name) {
  for (const auto& [k, n] : experiment_names())
    if (n == name) return k;
  return std::nullopt;
}

RunConfig parse_config(const std::string& text) {
  pt::ptree tree;
  try {
    std::istringstream in(text);
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(std::string("config error: ") + e.what());
  }
  RunConfig c;
  Reader r(tree);
  std::string experiment;
  r.get("experiment", experiment);
  if (experiment.empty()) {
    r.error("missing required field 'experiment'");
  } else if (auto e = experiment_from_string(experiment)) {
    c.experiment = *e;
  } else {
    r.error("experiment: unknown experiment '" + experiment + "'");
  }
  r.get("seed", c.seed);
  r.get("potential.family", c.potential.family);
  r.get("potential.epsilon", c.potential.epsilon);
  r.get("potential.quartic", c.potential.quartic);
  r.get("potential.allow_unsupported", c.potential.allow_unsupported);
  r.get("model.beta", c.beta);
  r.get("model.energy", c.energy);
  r.get("model.gamma", c.gamma);
  r.get("model.N", c.N);
  r.get("simulation.dt_micro", c.dt_micro);
  r.get("simulation.substeps_flow", c.substeps_flow);
  r.get("simulation.replicas", c.replicas);
  r.get("simulation.t_macro", c.t_macro);
  r.get("simulation.snapshot_macro", c.snapshot_macro);
  r.get("simulation.lag_macro", c.lag_macro);
  r.get("simulation.mode_lag_macro", c.mode_lag_macro);
  r.get("simulation.origin_stride", c.origin_stride);
  r.get("simulation.bootstrap", c.bootstrap);
  r.get("simulation.mixing_sweeps", c.mixing_sweeps);
  r.get("fit.gk_window_lo", c.gk_window_lo);
  r.get("fit.gk_window_hi", c.gk_window_hi);
  r.get("fit.rho_lo", c.rho_lo);
  r.get("fit.rho_hi", c.rho_hi);
  r.get("fit.modes", c.modes);
  r.get("saddle.windows", c.windows);
  r.get("saddle.degree", c.degree);
  r.get("gap.L", c.gap_L);
  r.get("gap.amplitude", c.gap_amplitude);
  r.get("gap.records", c.gap_records);
  r.get("gap.horizon_factor", c.gap_horizon_factor);
  r.get("gap.dt", c.gap_dt);
  r.get("output.directory", c.output);
  r.check_unknown();
  if (!r.errors().empty()) raise(r.errors());
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config error: cannot read " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string serialize_config(const RunConfig& c) {
  std::ostringstream out;
  auto num = [](double v) { return format_double(v); };
  out << "experiment = " << to_string(c.experiment) << "\n";
  out << "seed = " << c.seed << "\n\n";
  out << "[potential]\n";
  out << "family = " << c.potential.family << "\n";
  out << "epsilon = " << num(c.potential.epsilon) << "\n";
  out << "quartic = " << num(c.potential.quartic) << "\n";
  out << "allow_unsupported = " << (c.potential.allow_unsupported ? "true" : "false") << "\n\n";
  out << "[model]\n";
  if (c.beta) out << "beta = " << num(*c.beta) << "\n";
  if (c.energy) out << "energy = " << num(*c.energy) << "\n";
  if (c.gamma) out << "gamma = " << num(*c.gamma) << "\n";
  out << "N = " << c.N << "\n\n";
  out << "[simulation]\n";
  out << "dt_micro = " << num(c.dt_micro) << "\n";
  out << "substeps_flow = " << c.substeps_flow << "\n";
  out << "replicas = " << c.replicas << "\n";
  if (c.t_macro) out << "t_macro = " << num(*c.t_macro) << "\n";
  if (c.snapshot_macro) out << "snapshot_macro = " << num(*c.snapshot_macro) << "\n";
  if (c.lag_macro) out << "lag_macro = " << num(*c.lag_macro) << "\n";
  if (c.mode_lag_macro) out << "mode_lag_macro = " << num(*c.mode_lag_macro) << "\n";
  out << "origin_stride = " << c.origin_stride << "\n";
  out << "bootstrap = " << c.bootstrap << "\n";
  out << "mixing_sweeps = " << c.mixing_sweeps << "\n\n";
  out << "[fit]\n";
  out << "gk_window_lo = " << num(c.gk_window_lo) << "\n";
  out << "gk_window_hi = " << num(c.gk_window_hi) << "\n";
  out << "rho_lo = " << num(c.rho_lo) << "\n";
  out << "rho_hi = " << num(c.rho_hi) << "\n";
  out << "modes = " << list_text(c.modes) << "\n\n";
  out << "[saddle]\n";
  out << "windows = " << list_text(c.windows) << "\n";
  out << "degree = " << c.degree << "\n\n";
  out << "[gap]\n";
  out << "L = " << list_text(c.gap_L) << "\n";
  out << "amplitude = " << num(c.gap_amplitude) << "\n";
  out << "records = " << c.gap_records << "\n";
  out << "horizon_factor = " << num(c.gap_horizon_factor) << "\n";
  out << "dt = " << num(c.gap_dt) << "\n\n";
  out << "[output]\n";
  out << "directory = " << c.output << "\n";
  return out.str();
}

void validate_config(const RunConfig& c) {
  std::vector<std::string> errors;
  const Experiment e = c.experiment;
  const bool needs_gamma = e != Experiment::thermo && e != Experiment::sample;
  const bool needs_state = e != Experiment::check_fd;
  const bool ensemble = e == Experiment::correlate || e == Experiment::green_kubo ||
                        e == Experiment::modes || e == Experiment::invariance || e == Experiment::evolve;
  if (needs_gamma && !c.gamma) errors.push_back("missing required field 'model.gamma'");
  if (c.gamma && !(*c.gamma > 0.0)) errors.push_back("model.gamma must be positive");
  if (needs_state && e != Experiment::gap && !c.beta && !c.energy)
    errors.push_back("missing required field 'model.beta' (or 'model.energy')");
  if (e == Experiment::gap && !c.energy) errors.push_back("missing required field 'model.energy'");
  if (c.beta && !(*c.beta > 0.0)) errors.push_back("model.beta must be positive");
  if (c.energy && !(*c.energy > 0.0)) errors.push_back("model.energy must be positive");
  if (c.N < 2) errors.push_back("model.N must be at least 2");
  if (!(c.dt_micro > 0.0)) errors.push_back("simulation.dt_micro must be positive");
  if (c.replicas < 1) errors.push_back("simulation.replicas must be at least 1");
  if (ensemble) {
    if (!c.t_macro) errors.push_back("missing required field 'simulation.t_macro'");
    else if (!(*c.t_macro > 0.0)) errors.push_back("simulation.t_macro must be positive");
    if (!c.snapshot_macro) errors.push_back("missing required field 'simulation.snapshot_macro'");
    else if (!(*c.snapshot_macro > 0.0)) errors.push_back("simulation.snapshot_macro must be positive");
  }
  if ((e == Experiment::correlate || e == Experiment::green_kubo || e == Experiment::modes) && c.replicas < 2)
    errors.push_back("simulation.replicas must be at least 2 for correlation estimates");
  if (c.origin_stride < 1) errors.push_back("simulation.origin_stride must be at least 1");
  if (!(c.rho_lo > 0.0 && c.rho_lo < c.rho_hi && c.rho_hi < 1.0))
    errors.push_back("fit.rho_lo and fit.rho_hi must satisfy 0 < rho_lo < rho_hi < 1");
  if (!(c.gk_window_lo >= 0.0 && c.gk_window_lo < c.gk_window_hi && c.gk_window_hi <= 1.0))
    errors.push_back("fit.gk_window_lo and fit.gk_window_hi must satisfy 0 <= lo < hi <= 1");
  if (c.degree < 1) errors.push_back("saddle.degree must be at least 1");
  for (int k : c.windows)
    if (k < 1) errors.push_back("saddle.windows entries must be at least 1");
  for (std::size_t L : c.gap_L)
    if (L < 1) errors.push_back("gap.L entries must be at least 1");
  if (!(c.gap_dt > 0.0)) errors.push_back("gap.dt must be positive");
  if (!errors.empty()) raise(errors);
}

double resolve_beta(const RunConfig& config, const Potential& potential) {
  if (config.beta) return *config.beta;
  if (config.energy) return beta_of_energy(potential, *config.energy);
  throw ConfigError("config error:\n  - missing required field 'model.beta' (or 'model.energy')");
}

}  // namespace chainlab

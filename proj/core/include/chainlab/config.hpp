#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "chainlab/potential.hpp"

namespace chainlab {

enum class Experiment {
  thermo,
  sample,
  evolve,
  correlate,
  green_kubo,
  modes,
  bounds,
  saddle,
  gap,
  check_fd,
  invariance
};

std::string to_string(Experiment e);
std::optional<Experiment> experiment_from_string(const std::string& name);

/// Everything a run needs. Together with the seed it determines every output byte.
///
/// Text form (INI style, ';' comments):
///
///   experiment = green-kubo
///   seed = 1
///   [potential]   family, epsilon, quartic, allow_unsupported
///   [model]       beta | energy, gamma, N
///   [simulation]  dt_micro, substeps_flow, replicas, t_macro, snapshot_macro,
///                 lag_macro, mode_lag_macro, origin_stride, bootstrap, mixing_sweeps
///   [fit]         gk_window_lo, gk_window_hi, rho_lo, rho_hi, modes
///   [saddle]      windows, degree
///   [gap]         L, amplitude, records, horizon_factor, dt
///   [output]      directory
struct RunConfig {
  Experiment experiment = Experiment::thermo;
  std::uint64_t seed = 1;
  PotentialSpec potential;

  std::optional<double> beta;
  std::optional<double> energy;
  std::optional<double> gamma;
  std::size_t N = 64;

  double dt_micro = 0.05;
  int substeps_flow = 0;
  std::size_t replicas = 2;
  std::optional<double> t_macro;
  std::optional<double> snapshot_macro;
  std::optional<double> lag_macro;       // default: t_macro
  std::optional<double> mode_lag_macro;  // default: t_macro
  std::size_t origin_stride = 1;
  std::size_t bootstrap = 200;
  std::size_t mixing_sweeps = 200;

  double gk_window_lo = 0.25;
  double gk_window_hi = 1.0;
  double rho_lo = 0.2;
  double rho_hi = 0.9;
  std::vector<int> modes{1, 2};

  std::vector<int> windows{1, 2};
  int degree = 2;

  std::vector<std::size_t> gap_L{8, 16, 32};
  double gap_amplitude = 0.5;
  std::size_t gap_records = 200;
  double gap_horizon_factor = 1.0;
  double gap_dt = 0.05;

  std::string output = "chainlab-out";

  friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

/// Parses the text form. Throws ConfigError listing every problem found, each
/// naming its field as section.key.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);
std::string serialize_config(const RunConfig& config);

/// Experiment-specific requirements (e.g. gamma for dynamics); throws ConfigError.
void validate_config(const RunConfig& config);

/// beta from the config, or beta(E) when only the energy is given.
double resolve_beta(const RunConfig& config, const Potential& potential);

}  // namespace chainlab

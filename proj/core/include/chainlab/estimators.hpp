#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "chainlab/observables.hpp"
#include "chainlab/potential.hpp"

namespace chainlab {

enum class EstimateMethod { green_kubo_slope, mode_relaxation, variational };
std::string to_string(EstimateMethod method);

struct DiffusivityEstimate {
  EstimateMethod method = EstimateMethod::green_kubo_slope;
  double D_hat = 0.0;
  double std_error = 0.0;
  double window_lo = 0.0;  // fit interval; microscopic time for Green-Kubo, macroscopic for modes
  double window_hi = 0.0;
  std::map<std::string, double> diagnostics;
};

/// m(t) = sum_i i^2 C(i, 0, t) over wrapped offsets, one entry per row of C.
Eigen::VectorXd second_moment(const Eigen::MatrixXd& C, const std::vector<int>& lags);

struct GreenKuboOptions {
  double window_lo_fraction = 0.25;  // fit over [lo * t_max, hi * t_max]
  double window_hi_fraction = 1.0;
};

/// Weighted least-squares fit of m(t) = 2 chi D t + c; bootstrap standard error.
DiffusivityEstimate green_kubo_diffusivity(const CorrelationEstimate& C, const ThermoSummary& thermo,
                                           const GreenKuboOptions& options = {});

struct ModeFitOptions {
  double rho_lo = 0.2;
  double rho_hi = 0.9;
  std::size_t min_points = 5;
};

/// Log-linear fit of rho(t) = exp(-D (2 pi n)^2 t) in macroscopic time over the
/// contiguous stretch where rho_lo <= rho <= rho_hi. When the record ends before rho
/// reaches rho_lo the fit uses what is available and reports window_truncated = 1.
DiffusivityEstimate mode_relaxation(const ModeCorrelation& mode, const ModeFitOptions& options = {});

struct KappaBounds {
  double lower = 0.0;
  double upper = 0.0;
  double beta = 0.0;
  double gamma = 0.0;
};

/// lower = gamma / (4 beta <r^2>), upper = gamma <V''> / 4 + 3 / (4 gamma).
KappaBounds kappa_bounds(const ThermoSummary& thermo, double gamma);

/// L1 distance between C(., 0, t_row)/chi and the discrete Gaussian of variance 2 D t.
double heat_kernel_l1(const CorrelationEstimate& C, const ThermoSummary& thermo, double D_hat,
                      std::size_t row);

struct GapOptions {
  std::size_t replicas = 400;
  double amplitude = 0.5;       // relative energy perturbation of the slowest profile
  double dt = 0.05;             // noise sweep step
  double gamma = 1.0;
  double horizon_factor = 1.0;  // run for horizon_factor * L^2 / gamma
  std::size_t records = 200;    // samples of the profile amplitude over the horizon
  std::size_t mixing_sweeps = 200;
  bool paired_control = true;   // subtract an unperturbed copy driven by the same noise
  std::size_t bootstrap = 200;
  double rho_lo = 0.2;
  double rho_hi = 0.9;
  std::uint64_t seed = 0;
  std::size_t parallelism = 1;
};

struct GapRow {
  std::size_t L = 0;
  double energy = 0.0;
  double tau_hat = 0.0;
  double std_error = 0.0;
  double fit_lo = 0.0;
  double fit_hi = 0.0;
  double log_residual_rms = 0.0;  // departure of the windowed decay from a pure exponential
  std::vector<double> times;
  std::vector<double> rho;
};

/// Noise-only relaxation on an open chain of L sites: microcanonical start at energy E,
/// site energies scaled by 1 + amplitude cos(pi (i + 1/2) / L); fits the decay time of
/// the ensemble-mean amplitude of that profile.
std::vector<GapRow> gap_relaxation(const Potential& potential, const std::vector<std::size_t>& L_values,
                                   double energy, const GapOptions& options = {});

}  // namespace chainlab

#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "chainlab/chain_state.hpp"
#include "chainlab/potential.hpp"
#include "chainlab/rng.hpp"

namespace chainlab {

std::vector<double> site_energies(const ChainState& state, const Potential& potential);
void site_energies(const ChainState& state, const Potential& potential, std::vector<double>& out);

/// Bond currents between site i and i+1 (ring): W = WA + WS, martingale coefficient sigma.
struct CurrentSample {
  std::vector<double> WA;
  std::vector<double> WS;
  std::vector<double> sigma;
};

CurrentSample currents(const ChainState& state, const Potential& potential, double gamma);

/// A periodic function on the unit torus sampled at the lattice points i/N.
struct TestFunction {
  std::string name;
  std::vector<double> values;

  static TestFunction constant(std::size_t n);
  static TestFunction cosine_mode(int mode, std::size_t n);
  static TestFunction sine_mode(int mode, std::size_t n);
  static TestFunction from_callable(std::string name, const std::function<double(double)>& h,
                                    std::size_t n);

  /// N^-1 sum_i H(i/N)^2, the static variance of the field in units of chi.
  double mean_square() const;
};

/// N^-1/2 sum_i H(i/N) (E_i - mean_energy).
double fluctuation_field(const std::vector<double>& energies, const TestFunction& h,
                         double mean_energy);
double fluctuation_field(const ChainState& state, const Potential& potential,
                         const TestFunction& h, const ThermoSummary& thermo);

/// Space-time energy correlation C(i, 0, t), averaged over replicas and translations.
/// Rows index lag times, columns index wrapped lattice offsets in (-N/2, N/2].
struct CorrelationEstimate {
  std::size_t N = 0;
  std::vector<double> times;  // microscopic time of each row
  std::vector<int> lags;      // ascending wrapped offsets
  Eigen::MatrixXd C;
  Eigen::MatrixXd std_error;
  std::size_t replicas = 0;
  std::vector<Eigen::MatrixXd> resamples;  // bootstrap replicates of C

  std::size_t column(int lag) const;
};

/// Equilibrium autocorrelation of the cosine and sine components of one Fourier mode.
struct ModeCorrelation {
  int mode = 0;
  std::vector<double> times_micro;
  std::vector<double> times_macro;
  Eigen::VectorXd rho;
  Eigen::MatrixXd rho_resamples;  // bootstrap replicate per row
  double var_cos = 0.0;
  double var_sin = 0.0;
  double var_cos_se = 0.0;
  double var_sin_se = 0.0;
  std::size_t replicas = 0;
};

struct CorrelationSpec {
  std::size_t N = 0;
  double snapshot_dt = 1.0;        // microscopic time between snapshots
  std::size_t max_lag = 0;         // correlation lags, in snapshots
  std::size_t origin_stride = 1;   // time-origin spacing, in snapshots
  std::vector<int> modes;          // Fourier modes to track
  std::size_t mode_max_lag = 0;    // mode autocorrelation lags, in snapshots
  double mean_energy = 0.0;
  std::size_t bootstrap = 200;
  std::uint64_t bootstrap_seed = 0;
};

/// Statistics of one replica trajectory. Pure function of the trajectory.
struct ReplicaStats {
  Eigen::MatrixXd corr;  // (max_lag + 1) x N, circular offset columns
  struct Mode {
    Eigen::VectorXd num;
    Eigen::VectorXd den;
    double mean_cos2 = 0.0;
    double mean_sin2 = 0.0;
  };
  std::vector<Mode> modes;
};

ReplicaStats analyze_trajectory(const CorrelationSpec& spec,
                                const std::vector<std::vector<double>>& energy_snapshots);

/// Merges replica statistics with replica-level Poisson bootstrap weights.
/// Replicas must be added in increasing index order for bit-reproducible output.
class CorrelationAccumulator {
 public:
  explicit CorrelationAccumulator(CorrelationSpec spec);

  void add(std::uint64_t replica, const ReplicaStats& stats);
  std::size_t replicas() const { return replicas_; }

  CorrelationEstimate correlation() const;
  std::vector<ModeCorrelation> modes() const;

 private:
  CorrelationSpec spec_;
  std::size_t replicas_ = 0;
  Eigen::MatrixXd corr_sum_;
  std::vector<Eigen::MatrixXd> corr_boot_;
  std::vector<double> weight_sum_;
  struct ModeSums {
    Eigen::VectorXd num, den;
    Eigen::MatrixXd num_boot, den_boot;
    double cos2 = 0.0, cos2_sq = 0.0, sin2 = 0.0, sin2_sq = 0.0;
  };
  std::vector<ModeSums> mode_sums_;
};

/// Poisson(1) draw by inversion, used for bootstrap replicate weights.
int poisson_one(RngStream& rng);

}  // namespace chainlab

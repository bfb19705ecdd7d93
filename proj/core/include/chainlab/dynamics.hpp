#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <vector>

#include "chainlab/chain_state.hpp"
#include "chainlab/gibbs.hpp"
#include "chainlab/potential.hpp"
#include "chainlab/rng.hpp"

namespace chainlab {

struct SimParams {
  double beta = 1.0;
  double gamma = 1.0;
  std::size_t N = 64;
  double dt_micro = 0.05;
  int substeps_flow = 0;  // 0 selects max(4, ceil(|tau| sqrt(delta_+) / 0.1))
  std::uint64_t seed = 0;
  Potential potential = make_potential({});
};

/// Largest admissible microscopic step, 0.1 / sqrt(delta_+).
double stability_limit(const Potential& potential);

/// Throws Error naming the first offending field.
void validate(const SimParams& params);

struct StepReport {
  double H_before = 0.0;
  double H_after = 0.0;
  double flow_projection_residual = 0.0;  // largest relative shell correction in the step
};

double total_energy(const ChainState& state, const Potential& potential);

/// One velocity-Verlet step of r'_j = p_j - p_{j-1}, p'_j = V'(r_{j+1}) - V'(r_j) on the ring.
void hamiltonian_step(ChainState& state, double dt, const Potential& potential);

/// RK4 substep count used by the noise flows for a flow of duration tau.
int flow_substeps(double tau, const Potential& potential, int requested = 0);

/// Flows (p, r) along r' = p, p' = -V'(r) for time tau and projects back onto the
/// starting energy shell. Returns the relative energy correction the projection applied.
double flow_pair(double& p, double& r, double tau, const Potential& potential, int substeps = 0);

/// Flow of X_i on (r_i, p_i).
double flow_x(ChainState& state, std::size_t i, double tau, const Potential& potential,
              int substeps = 0);
/// Flow of Y_{i,i+1} on (r_{i+1}, p_i).
double flow_y(ChainState& state, std::size_t i, double tau, const Potential& potential,
              int substeps = 0);

/// Noise part of the dynamics: each sweep visits the sites in a fresh random order
/// and applies the X_i flow then the Y_{i,i+1} flow, each for Gaussian time
/// sqrt(gamma dt) xi. Reuses its permutation buffer across sweeps.
class NoiseSweeper {
 public:
  explicit NoiseSweeper(Potential potential, Topology topology = Topology::ring,
                        int substeps = 0);

  /// Returns the largest projection residual of the sweep.
  double sweep(ChainState& state, double dt, double gamma, RngStream& rng);

 private:
  Potential potential_;
  Topology topology_;
  int substeps_;
  std::vector<std::uint32_t> order_;
};

double noise_sweep(ChainState& state, double dt, double gamma, RngStream& rng,
                   const Potential& potential, Topology topology = Topology::ring);

/// Strang splitting: noise(dt/2), Verlet(dt), noise(dt/2). Holds scratch buffers.
class Integrator {
 public:
  explicit Integrator(SimParams params);

  const SimParams& params() const { return params_; }

  StepReport step(ChainState& state, RngStream& rng);
  /// Same trajectory as repeated step() calls, without the energy bookkeeping.
  void advance(ChainState& state, RngStream& rng, std::size_t steps);

 private:
  double advance_one(ChainState& state, RngStream& rng);

  SimParams params_;
  NoiseSweeper sweeper_;
  std::vector<double> force_;
};

StepReport step(ChainState& state, const SimParams& params, RngStream& rng);

/// Function of the phase point that depends only on the listed sites.
struct LocalFunction {
  std::function<double(const ChainState&)> f;
  std::vector<std::size_t> support;
};

/// (A f + gamma S f)(state), with X_i f, Y f and their squares obtained from
/// fourth-order central differences of f along the exact flows.
double apply_generator_numeric(const LocalFunction& f, const ChainState& state,
                               const SimParams& params, double h = 2e-3);

}  // namespace chainlab

#include "chainlab/ensemble.hpp"

#include <cmath>
#include <string>

#include "chainlab/error.hpp"
#include "chainlab/gibbs.hpp"

namespace chainlab {

std::size_t whole_steps(double interval, double dt, const char* what) {
  const double ratio = interval / dt;
  const double rounded = std::round(ratio);
  if (!(rounded >= 1.0) || std::abs(ratio - rounded) > 1e-9 * std::max(1.0, ratio))
    throw Error(std::string(what) + " must be a positive whole multiple of dt_micro");
  return static_cast<std::size_t>(rounded);
}

EnsembleResult run_equilibrium_ensemble(const EnsembleSpec& spec) {
  validate(spec.sim);
  if (spec.replicas < 2) throw Error("ensemble needs at least 2 replicas");
  EnsembleResult result;
  result.thermo = thermo(spec.sim.potential, spec.sim.beta);
  result.steps_per_snapshot = whole_steps(spec.snapshot_micro, spec.sim.dt_micro, "snapshot stride");
  const std::size_t intervals = whole_steps(spec.horizon_micro, spec.snapshot_micro, "horizon");
  result.snapshots = intervals + 1;

  CorrelationSpec cs;
  cs.N = spec.sim.N;
  cs.snapshot_dt = spec.snapshot_micro;
  cs.max_lag = whole_steps(spec.max_lag_micro, spec.snapshot_micro, "maximum lag");
  cs.mode_max_lag = spec.mode_max_lag_micro > 0.0
                        ? whole_steps(spec.mode_max_lag_micro, spec.snapshot_micro, "mode lag")
                        : intervals;
  if (cs.max_lag > intervals || cs.mode_max_lag > intervals)
    throw Error("lags exceed the trajectory horizon");
  cs.origin_stride = spec.origin_stride;
  cs.modes = spec.modes;
  cs.mean_energy = result.thermo.mean_energy;
  cs.bootstrap = spec.bootstrap;
  cs.bootstrap_seed = spec.sim.seed ^ 0x9e3779b97f4a7c15ULL;

  CorrelationAccumulator acc(cs);
  const std::size_t steps = result.steps_per_snapshot;
  auto work = [&](std::size_t m) {
    RngStream rng(spec.sim.seed, m);
    ChainState state = sample_gibbs(spec.sim.potential, spec.sim.beta, spec.sim.N, rng);
    Integrator integrator(spec.sim);
    std::vector<std::vector<double>> snaps(intervals + 1);
    site_energies(state, spec.sim.potential, snaps[0]);
    for (std::size_t s = 1; s <= intervals; ++s) {
      integrator.advance(state, rng, steps);
      site_energies(state, spec.sim.potential, snaps[s]);
    }
    return analyze_trajectory(cs, snaps);
  };
  replicate(spec.replicas, spec.parallelism, work,
            [&](std::size_t m, ReplicaStats&& stats) { acc.add(m, stats); });
  result.correlation = acc.correlation();
  result.modes = acc.modes();
  return result;
}

}  // namespace chainlab

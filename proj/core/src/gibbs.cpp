#include "chainlab/gibbs.hpp"

#include <cmath>

#include "chainlab/dynamics.hpp"
#include "chainlab/error.hpp"

namespace chainlab {

double sample_stretch(const Potential& potential, double beta, RngStream& rng) {
  const double dm = potential.delta_minus();
  const double sd = 1.0 / std::sqrt(beta * dm);
  if (potential.is_harmonic()) return sd * rng.normal();
  for (;;) {
    const double r = sd * rng.normal();
    const double log_accept = -beta * (potential.V(r) - 0.5 * dm * r * r);
    if (std::log(rng.uniform()) < log_accept) return r;
  }
}

ChainState sample_gibbs(const Potential& potential, double beta, std::size_t n, RngStream& rng) {
  if (n < 2) throw Error("sample_gibbs: N must be at least 2");
  if (!(beta > 0.0)) throw Error("sample_gibbs: beta must be positive");
  ChainState state(n);
  const double sd = 1.0 / std::sqrt(beta);
  for (std::size_t i = 0; i < n; ++i) {
    state.p[i] = sd * rng.normal();
    state.r[i] = sample_stretch(potential, beta, rng);
  }
  return state;
}

void set_site_energy(double& p, double& r, const Potential& potential, double target) {
  const double current = 0.5 * p * p + potential.V(r);
  if (current <= 0.0) {
    p = std::sqrt(2.0 * target);
    r = 0.0;
    return;
  }
  rescale_site(p, r, potential, target / current, potential.V(r));
}

void rescale_site(double& p, double& r, const Potential& potential, double factor,
                  double stretch_energy) {
  const double root = std::sqrt(factor);
  p *= root;
  if (r == 0.0) return;
  const double mag = potential.inverse_positive(stretch_energy * factor, std::abs(r) * root);
  r = std::copysign(mag, r);
}

void rescale_total_energy(ChainState& state, const Potential& potential, double total) {
  double sum = 0.0;
  for (std::size_t i = 0; i < state.size(); ++i)
    sum += 0.5 * state.p[i] * state.p[i] + potential.V(state.r[i]);
  if (!(sum > 0.0)) throw Error("rescale_total_energy: state has zero energy");
  const double factor = total / sum;
  for (std::size_t i = 0; i < state.size(); ++i) {
    const double e = 0.5 * state.p[i] * state.p[i] + potential.V(state.r[i]);
    set_site_energy(state.p[i], state.r[i], potential, e * factor);
  }
}

ChainState sample_microcanonical(const Potential& potential, std::size_t n, double energy,
                                 RngStream& rng, std::size_t mixing_sweeps, Topology topology) {
  if (!(energy > 0.0)) throw Error("sample_microcanonical: E must be positive");
  const double beta = beta_of_energy(potential, energy);
  ChainState state = sample_gibbs(potential, beta, n, rng);
  const double total = static_cast<double>(n) * energy;
  rescale_total_energy(state, potential, total);
  NoiseSweeper sweeper(potential, topology);
  for (std::size_t s = 0; s < mixing_sweeps; ++s) sweeper.sweep(state, 1.0, 1.0, rng);
  return state;
}

}  // namespace chainlab

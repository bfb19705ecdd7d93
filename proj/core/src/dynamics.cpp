#include "chainlab/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "chainlab/error.hpp"
#include "chainlab/sincos.hpp"

namespace chainlab {

double stability_limit(const Potential& potential) {
  return 0.1 / std::sqrt(potential.delta_plus());
}

void validate(const SimParams& params) {
  auto fail = [](const std::string& msg) { throw Error("invalid simulation parameters: " + msg); };
  if (!(params.beta > 0.0)) fail("beta must be positive");
  if (!(params.gamma >= 0.0)) fail("gamma must be nonnegative");
  if (params.N < 2) fail("N must be at least 2");
  if (!(params.dt_micro > 0.0)) fail("dt_micro must be positive");
  if (params.dt_micro > stability_limit(params.potential) * (1.0 + 1e-12)) {
    std::ostringstream msg;
    msg << "dt_micro = " << params.dt_micro << " exceeds the stability limit "
        << stability_limit(params.potential);
    fail(msg.str());
  }
  if (params.substeps_flow < 0) fail("substeps_flow must be nonnegative");
}

double total_energy(const ChainState& state, const Potential& potential) {
  double h = 0.0;
  for (std::size_t i = 0; i < state.size(); ++i)
    h += 0.5 * state.p[i] * state.p[i] + potential.V(state.r[i]);
  return h;
}

namespace {

void verlet(ChainState& state, double dt, const Potential& potential, std::vector<double>& force) {
  const std::size_t n = state.size();
  auto& p = state.p;
  auto& r = state.r;
  force.resize(n);
  auto kick = [&](double h) {
    for (std::size_t j = 0; j < n; ++j) force[j] = potential.dV(r[j]);
    for (std::size_t j = 0; j + 1 < n; ++j) p[j] += h * (force[j + 1] - force[j]);
    p[n - 1] += h * (force[0] - force[n - 1]);
  };
  kick(0.5 * dt);
  for (std::size_t j = 1; j < n; ++j) r[j] += dt * (p[j] - p[j - 1]);
  r[0] += dt * (p[0] - p[n - 1]);
  kick(0.5 * dt);
}

}  // namespace

void hamiltonian_step(ChainState& state, double dt, const Potential& potential) {
  if (!(dt > 0.0)) throw Error("hamiltonian_step: dt must be positive");
  std::vector<double> force;
  verlet(state, dt, potential, force);
}

int flow_substeps(double tau, const Potential& potential, int requested) {
  if (requested > 0) return requested;
  const double n = std::ceil(std::abs(tau) * std::sqrt(potential.delta_plus()) / 0.1);
  return std::max(4, static_cast<int>(n));
}

double flow_pair(double& p, double& r, double tau, const Potential& potential, int substeps) {
  if (tau == 0.0) return 0.0;
  if (potential.is_harmonic()) {
    const auto [s, c] = sincos(tau);
    const double p0 = p;
    p = p0 * c - r * s;
    r = r * c + p0 * s;
    return 0.0;
  }
  const double e0 = 0.5 * p * p + potential.V(r);
  if (e0 == 0.0) return 0.0;
  const int n = flow_substeps(tau, potential, substeps);
  const double h = tau / n;
  for (int k = 0; k < n; ++k) {
    const double k1r = p, k1p = -potential.dV(r);
    const double k2r = p + 0.5 * h * k1p, k2p = -potential.dV(r + 0.5 * h * k1r);
    const double k3r = p + 0.5 * h * k2p, k3p = -potential.dV(r + 0.5 * h * k2r);
    const double k4r = p + h * k3p, k4p = -potential.dV(r + h * k3r);
    r += h / 6.0 * (k1r + 2.0 * k2r + 2.0 * k3r + k4r);
    p += h / 6.0 * (k1p + 2.0 * k2p + 2.0 * k3p + k4p);
  }
  const double v1 = potential.V(r);
  const double e1 = 0.5 * p * p + v1;
  rescale_site(p, r, potential, e0 / e1, v1);
  return std::abs(e1 - e0) / e0;
}

double flow_x(ChainState& state, std::size_t i, double tau, const Potential& potential,
              int substeps) {
  return flow_pair(state.p[i], state.r[i], tau, potential, substeps);
}

double flow_y(ChainState& state, std::size_t i, double tau, const Potential& potential,
              int substeps) {
  const std::size_t j = i + 1 == state.size() ? 0 : i + 1;
  return flow_pair(state.p[i], state.r[j], tau, potential, substeps);
}

NoiseSweeper::NoiseSweeper(Potential potential, Topology topology, int substeps)
    : potential_(std::move(potential)), topology_(topology), substeps_(substeps) {}

double NoiseSweeper::sweep(ChainState& state, double dt, double gamma, RngStream& rng) {
  if (!(dt > 0.0)) throw Error("noise_sweep: dt must be positive");
  if (gamma == 0.0) return 0.0;
  const std::size_t n = state.size();
  order_.resize(n);
  for (std::size_t i = 0; i < n; ++i) order_[i] = static_cast<std::uint32_t>(i);
  for (std::size_t i = n - 1; i > 0; --i) std::swap(order_[i], order_[rng.below(i + 1)]);
  const double scale = std::sqrt(gamma * dt);
  const bool ring = topology_ == Topology::ring;
  double residual = 0.0;
  for (std::uint32_t i : order_) {
    const double xi_x = rng.normal();
    const double xi_y = rng.normal();
    residual = std::max(residual, flow_x(state, i, scale * xi_x, potential_, substeps_));
    if (ring || i + 1 < n)
      residual = std::max(residual, flow_y(state, i, scale * xi_y, potential_, substeps_));
  }
  return residual;
}

double noise_sweep(ChainState& state, double dt, double gamma, RngStream& rng,
                   const Potential& potential, Topology topology) {
  NoiseSweeper sweeper(potential, topology);
  return sweeper.sweep(state, dt, gamma, rng);
}

Integrator::Integrator(SimParams params)
    : params_(std::move(params)), sweeper_(params_.potential, Topology::ring, params_.substeps_flow) {
  validate(params_);
}

double Integrator::advance_one(ChainState& state, RngStream& rng) {
  const double dt = params_.dt_micro;
  double residual = 0.0;
  if (params_.gamma != 0.0) residual = sweeper_.sweep(state, 0.5 * dt, params_.gamma, rng);
  verlet(state, dt, params_.potential, force_);
  if (params_.gamma != 0.0)
    residual = std::max(residual, sweeper_.sweep(state, 0.5 * dt, params_.gamma, rng));
  return residual;
}

StepReport Integrator::step(ChainState& state, RngStream& rng) {
  StepReport report;
  report.H_before = total_energy(state, params_.potential);
  report.flow_projection_residual = advance_one(state, rng);
  report.H_after = total_energy(state, params_.potential);
  return report;
}

void Integrator::advance(ChainState& state, RngStream& rng, std::size_t steps) {
  for (std::size_t s = 0; s < steps; ++s) advance_one(state, rng);
}

StepReport step(ChainState& state, const SimParams& params, RngStream& rng) {
  Integrator integrator(params);
  return integrator.step(state, rng);
}

double apply_generator_numeric(const LocalFunction& f, const ChainState& state,
                               const SimParams& params, double h) {
  const std::size_t n = state.size();
  const Potential& potential = params.potential;
  constexpr int kSubsteps = 64;
  std::set<std::size_t> x_sites, y_sites;
  for (std::size_t s : f.support) {
    const std::size_t i = s % n;
    x_sites.insert(i);
    y_sites.insert(i);
    y_sites.insert((i + n - 1) % n);
  }
  // First and second derivative of f along the flow of one field.
  auto derivatives = [&](bool is_x, std::size_t i) {
    double values[5];
    for (int k = -2; k <= 2; ++k) {
      ChainState moved = state;
      if (k != 0) {
        if (is_x) flow_x(moved, i, k * h, potential, kSubsteps);
        else flow_y(moved, i, k * h, potential, kSubsteps);
      }
      values[k + 2] = f.f(moved);
    }
    const double d1 = (values[0] - 8.0 * values[1] + 8.0 * values[3] - values[4]) / (12.0 * h);
    const double d2 = (-values[0] + 16.0 * values[1] - 30.0 * values[2] + 16.0 * values[3] - values[4]) /
                      (12.0 * h * h);
    return std::pair{d1, d2};
  };
  double drift = 0.0, noise = 0.0;
  for (std::size_t i : x_sites) {
    const auto [d1, d2] = derivatives(true, i);
    drift += d1;
    noise += d2;
  }
  for (std::size_t i : y_sites) {
    const auto [d1, d2] = derivatives(false, i);
    drift -= d1;
    noise += d2;
  }
  const double value = drift + 0.5 * params.gamma * noise;
  if (!std::isfinite(value)) throw Error("apply_generator_numeric: non-finite value");
  return value;
}

}  // namespace chainlab

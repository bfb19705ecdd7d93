#pragma once

#include <cstddef>

#include "chainlab/chain_state.hpp"
#include "chainlab/potential.hpp"
#include "chainlab/rng.hpp"

namespace chainlab {

/// Ring (periodic) or open chain of sites; open chains omit the bond from the
/// last site back to the first.
enum class Topology { ring, open };

/// One stretch from exp(-beta V(r)) / Z_beta by rejection against the
/// Gaussian envelope exp(-beta delta_- r^2 / 2).
double sample_stretch(const Potential& potential, double beta, RngStream& rng);

/// Product Gibbs state: p_i ~ N(0, 1/beta), r_i from sample_stretch.
ChainState sample_gibbs(const Potential& potential, double beta, std::size_t n, RngStream& rng);

/// Moves (p, r) along its single-site energy shell family to energy `target`,
/// keeping the polar angle of (p / sqrt 2, sgn(r) sqrt V(r)) fixed.
void set_site_energy(double& p, double& r, const Potential& potential, double target);

/// Same map, multiplying the site energy by `factor` when V(r) is already known.
void rescale_site(double& p, double& r, const Potential& potential, double factor,
                  double stretch_energy);

/// Multiplies every site energy by total / sum_i E_i, keeping angles fixed.
void rescale_total_energy(ChainState& state, const Potential& potential, double total);

/// Approximate sample of the constant-energy surface sum_i E_i = n E:
/// Gibbs draw at beta(E), rescale onto the surface, then `mixing_sweeps`
/// noise-only sweeps (dt = 1, gamma = 1).
ChainState sample_microcanonical(const Potential& potential, std::size_t n, double energy,
                                 RngStream& rng, std::size_t mixing_sweeps,
                                 Topology topology = Topology::ring);

}  // namespace chainlab

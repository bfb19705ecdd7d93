#pragma once

#include <functional>
#include <string>

namespace chainlab {

enum class PotentialFamily { harmonic, log_cosh, fpu_beta, custom };

/// Selects a potential by family name and parameters, as read from a config.
struct PotentialSpec {
  std::string family = "harmonic";  // harmonic | log-cosh | fpu-beta
  double epsilon = 0.0;             // log-cosh: V = r^2/2 + epsilon log cosh r
  double quartic = 0.0;             // fpu-beta: V = r^2/2 + quartic r^4/4
  bool allow_unsupported = false;   // construct even if uniform convexity fails

  friend bool operator==(const PotentialSpec&, const PotentialSpec&) = default;
};

/// User-supplied potential; V must be even with V(0) = 0.
struct CustomPotential {
  std::function<double(double)> V;
  std::function<double(double)> dV;
  std::function<double(double)> d2V;
};

/// (3/4)^(1/16), the lower limit on delta_-/delta_+ needed by the spectral gap argument.
double convexity_ratio_threshold();

/// Interaction potential V of the inter-particle stretch, with its first two
/// derivatives and the uniform convexity bounds delta_- <= V'' <= delta_+.
class Potential {
 public:
  PotentialFamily family() const { return family_; }
  bool is_harmonic() const { return family_ == PotentialFamily::harmonic; }
  const std::string& name() const { return name_; }
  double epsilon() const { return epsilon_; }
  double quartic() const { return quartic_; }

  double V(double r) const;
  double dV(double r) const;
  double d2V(double r) const;

  double delta_minus() const { return delta_minus_; }
  double delta_plus() const { return delta_plus_; }
  /// Whether delta_-/delta_+ exceeds convexity_ratio_threshold(). Advisory only.
  bool satisfies_iii() const { return satisfies_iii_; }
  /// False when built with allow_unsupported despite failing symmetry or convexity.
  bool supported() const { return supported_; }

  /// The r >= 0 with V(r) = level. `guess` (if positive) seeds the Newton iteration.
  double inverse_positive(double level, double guess = -1.0) const;

 private:
  friend Potential make_potential(const PotentialSpec&);
  friend Potential make_custom_potential(std::string, CustomPotential, double, double, bool);

  PotentialFamily family_ = PotentialFamily::harmonic;
  std::string name_ = "harmonic";
  double epsilon_ = 0.0;
  double quartic_ = 0.0;
  double delta_minus_ = 1.0;
  double delta_plus_ = 1.0;
  bool satisfies_iii_ = true;
  bool supported_ = true;
  CustomPotential custom_;
};

/// Throws AssumptionError (naming the violated assumption) for families whose
/// V'' is unbounded or changes sign, unless spec.allow_unsupported is set.
Potential make_potential(const PotentialSpec& spec);

/// Wraps user callables. The declared bounds are checked on a grid over [-10, 10].
Potential make_custom_potential(std::string name, CustomPotential fns, double delta_minus,
                                double delta_plus, bool allow_unsupported = false);

/// Single-site equilibrium quantities under exp(-beta V(r)) dr / Z_beta.
struct ThermoSummary {
  double beta = 0.0;
  double Z_beta = 0.0;
  double mean_V = 0.0;
  double mean_energy = 0.0;     // 1/(2 beta) + <V>
  double chi = 0.0;             // Var(E_0) = 1/(2 beta^2) + Var(V)
  double chi_derivative = 0.0;  // 1/(2 beta^2) - d<V>/d beta, 5-point stencil
  double mean_d2V = 0.0;
  double mean_r2 = 0.0;
  double mean_dV2 = 0.0;
  double mean_dV_r = 0.0;       // equals 1/beta by integration by parts
};

ThermoSummary thermo(const Potential& potential, double beta);

/// Inverse of beta -> mean_energy(beta); throws on E <= 0.
double beta_of_energy(const Potential& potential, double energy);

/// Half-width R of the integration domain: exp(-beta delta_- R^2 / 2) = e^-60.
double truncation_radius(const Potential& potential, double beta);

/// <g(r)>_beta for an arbitrary integrand, normalized by Z_beta.
double gibbs_expectation(const Potential& potential, double beta,
                         const std::function<double(double)>& g, bool even_integrand = false);

}  // namespace chainlab

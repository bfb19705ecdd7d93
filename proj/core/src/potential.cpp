#include "chainlab/potential.hpp"

#include <boost/math/tools/roots.hpp>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "chainlab/error.hpp"
#include "chainlab/quadrature.hpp"

namespace chainlab {

namespace {

double log_cosh(double r) {
  const double a = std::fabs(r);
  if (a < 1.0) {
    const double s = std::sinh(0.5 * a);
    return std::log1p(2.0 * s * s);
  }
  return a + std::log1p(std::exp(-2.0 * a)) - std::numbers::ln2;
}

// tanh through a single exp (expm1 near zero); agrees with std::tanh to a few ulp
double tanh_fast(double r) {
  const double a = std::fabs(r);
  if (a < 0.5) {
    const double t = std::expm1(-2.0 * a);
    return std::copysign(-t / (2.0 + t), r);
  }
  const double e = std::exp(-2.0 * a);
  return std::copysign((1.0 - e) / (1.0 + e), r);
}

double sech2(double r) {
  const double c = std::cosh(r);
  return std::isfinite(c) ? 1.0 / (c * c) : 0.0;
}

std::string format_param(const std::string& family, double value) {
  std::ostringstream s;
  s << family << "(" << value << ")";
  return s.str();
}

}  // namespace

double convexity_ratio_threshold() { return std::pow(0.75, 1.0 / 16.0); }

double Potential::V(double r) const {
  switch (family_) {
    case PotentialFamily::harmonic:
      return 0.5 * r * r;
    case PotentialFamily::log_cosh:
      return 0.5 * r * r + epsilon_ * log_cosh(r);
    case PotentialFamily::fpu_beta:
      return 0.5 * r * r + 0.25 * quartic_ * r * r * r * r;
    case PotentialFamily::custom:
      return custom_.V(r);
  }
  return 0.0;
}

double Potential::dV(double r) const {
  switch (family_) {
    case PotentialFamily::harmonic:
      return r;
    case PotentialFamily::log_cosh:
      return r + epsilon_ * tanh_fast(r);
    case PotentialFamily::fpu_beta:
      return r + quartic_ * r * r * r;
    case PotentialFamily::custom:
      return custom_.dV(r);
  }
  return 0.0;
}

double Potential::d2V(double r) const {
  switch (family_) {
    case PotentialFamily::harmonic:
      return 1.0;
    case PotentialFamily::log_cosh:
      return 1.0 + epsilon_ * sech2(r);
    case PotentialFamily::fpu_beta:
      return 1.0 + 3.0 * quartic_ * r * r;
    case PotentialFamily::custom:
      return custom_.d2V(r);
  }
  return 0.0;
}

double Potential::inverse_positive(double level, double guess) const {
  if (level <= 0.0) return 0.0;
  if (is_harmonic()) return std::sqrt(2.0 * level);
  // V is convex and increasing on r > 0 with delta_- r^2/2 <= V(r) <= delta_+ r^2/2.
  double hi = std::sqrt(2.0 * level / delta_minus_);
  double lo = std::isfinite(delta_plus_) ? std::sqrt(2.0 * level / delta_plus_) : 0.0;
  double r = (guess > lo && guess < hi) ? guess : hi;
  for (int iter = 0; iter < 100; ++iter) {
    const double f = V(r) - level;
    if (std::fabs(f) <= 2.0 * std::numeric_limits<double>::epsilon() * level) return r;
    if (f > 0.0) hi = std::min(hi, r);
    else lo = std::max(lo, r);
    const double slope = dV(r);
    double next = slope > 0.0 ? r - f / slope : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::fabs(next - r) <= 4.0 * std::numeric_limits<double>::epsilon() * r) return next;
    r = next;
  }
  std::ostringstream msg;
  msg << "inverse of V did not converge for level " << level << " (" << name_ << ")";
  throw RootFindError(msg.str());
}

Potential make_potential(const PotentialSpec& spec) {
  Potential p;
  if (spec.family == "harmonic") {
    p.family_ = PotentialFamily::harmonic;
    p.name_ = "harmonic";
    p.delta_minus_ = 1.0;
    p.delta_plus_ = 1.0;
  } else if (spec.family == "log-cosh" || spec.family == "logcosh") {
    if (!(spec.epsilon >= 0.0) || !std::isfinite(spec.epsilon))
      throw AssumptionError("log-cosh potential requires epsilon >= 0");
    p.family_ = PotentialFamily::log_cosh;
    p.name_ = format_param("log-cosh", spec.epsilon);
    p.epsilon_ = spec.epsilon;
    p.delta_minus_ = 1.0;  // sech^2 -> 0 at infinity
    p.delta_plus_ = 1.0 + spec.epsilon;
  } else if (spec.family == "fpu-beta") {
    p.family_ = PotentialFamily::fpu_beta;
    p.name_ = format_param("fpu-beta", spec.quartic);
    p.quartic_ = spec.quartic;
    if (spec.quartic > 0.0) {
      p.delta_minus_ = 1.0;
      p.delta_plus_ = std::numeric_limits<double>::infinity();
      if (!spec.allow_unsupported)
        throw AssumptionError("assumption (ii) violated: V'' = 1 + 3b r^2 is unbounded for fpu-beta");
    } else if (spec.quartic < 0.0) {
      p.delta_minus_ = -std::numeric_limits<double>::infinity();
      p.delta_plus_ = 1.0;
      if (!spec.allow_unsupported)
        throw AssumptionError("assumption (ii) violated: V'' = 1 + 3b r^2 changes sign for fpu-beta with b < 0");
    } else {
      p.delta_minus_ = p.delta_plus_ = 1.0;
    }
    p.supported_ = spec.quartic == 0.0;
  } else {
    throw ConfigError("unknown potential family '" + spec.family + "'");
  }
  p.satisfies_iii_ = p.supported_ && p.delta_minus_ / p.delta_plus_ > convexity_ratio_threshold();
  return p;
}

Potential make_custom_potential(std::string name, CustomPotential fns, double delta_minus,
                                double delta_plus, bool allow_unsupported) {
  if (!fns.V || !fns.dV || !fns.d2V) throw ConfigError("custom potential needs V, dV and d2V");
  Potential p;
  p.family_ = PotentialFamily::custom;
  p.name_ = std::move(name);
  p.custom_ = std::move(fns);
  p.delta_minus_ = delta_minus;
  p.delta_plus_ = delta_plus;

  bool ok = delta_minus > 0.0 && delta_plus >= delta_minus && std::isfinite(delta_plus);
  std::string why = ok ? "" : "assumption (ii) violated: need 0 < delta_- <= delta_+ < inf";
  if (ok && std::fabs(p.custom_.V(0.0)) > 1e-14) {
    ok = false;
    why = "assumption (i) violated: V(0) != 0";
  }
  constexpr int kGrid = 1000;
  for (int k = 0; ok && k <= kGrid; ++k) {
    const double r = -10.0 + 20.0 * k / kGrid;
    const double v = p.custom_.V(r);
    if (std::fabs(v - p.custom_.V(-r)) > 1e-12 * std::max(1.0, std::fabs(v))) {
      ok = false;
      why = "assumption (i) violated: V is not symmetric";
    }
    const double c = p.custom_.d2V(r);
    if (c < delta_minus - 1e-12 || c > delta_plus + 1e-12) {
      ok = false;
      why = "assumption (ii) violated: V'' leaves [delta_-, delta_+] on the test grid";
    }
  }
  if (!ok && !allow_unsupported) throw AssumptionError(why + " (" + p.name_ + ")");
  p.supported_ = ok;
  p.satisfies_iii_ = ok && delta_minus / delta_plus > convexity_ratio_threshold();
  return p;
}

double truncation_radius(const Potential& potential, double beta) {
  const double dm = potential.delta_minus() > 0.0 ? potential.delta_minus() : 1.0;
  return std::sqrt(120.0 / (beta * dm));
}

namespace {

struct WeightedIntegrator {
  const Potential& pot;
  double beta;
  double R;

  double operator()(const std::function<double(double)>& g, bool even) const {
    auto integrand = [&](double r) { return g(r) * std::exp(-beta * pot.V(r)); };
    if (even) return 2.0 * integrate(integrand, 0.0, R, 1e-13);
    return integrate(integrand, -R, R, 1e-13);
  }
};

double mean_V(const Potential& potential, double beta) {
  const WeightedIntegrator w{potential, beta, truncation_radius(potential, beta)};
  const double z = w([](double) { return 1.0; }, true);
  return w([&](double r) { return potential.V(r); }, true) / z;
}

}  // namespace

double gibbs_expectation(const Potential& potential, double beta,
                         const std::function<double(double)>& g, bool even_integrand) {
  if (!(beta > 0.0)) throw ConfigError("beta must be positive");
  const WeightedIntegrator w{potential, beta, truncation_radius(potential, beta)};
  const double z = w([](double) { return 1.0; }, true);
  return w(g, even_integrand) / z;
}

ThermoSummary thermo(const Potential& potential, double beta) {
  if (!(beta > 0.0) || !std::isfinite(beta)) throw ConfigError("thermo: beta must be positive");
  const WeightedIntegrator w{potential, beta, truncation_radius(potential, beta)};
  ThermoSummary t;
  t.beta = beta;
  t.Z_beta = w([](double) { return 1.0; }, true);
  const double inv_z = 1.0 / t.Z_beta;
  t.mean_V = w([&](double r) { return potential.V(r); }, true) * inv_z;
  const double mean_V2 = w([&](double r) { const double v = potential.V(r); return v * v; }, true) * inv_z;
  t.mean_d2V = w([&](double r) { return potential.d2V(r); }, true) * inv_z;
  t.mean_r2 = w([](double r) { return r * r; }, true) * inv_z;
  t.mean_dV2 = w([&](double r) { const double d = potential.dV(r); return d * d; }, true) * inv_z;
  t.mean_dV_r = w([&](double r) { return potential.dV(r) * r; }, true) * inv_z;
  t.mean_energy = 0.5 / beta + t.mean_V;

  // Var(p^2/2) = 1/(2 beta^2) for a unit-mass Gaussian momentum.
  const double var_V = mean_V2 - t.mean_V * t.mean_V;
  t.chi = 0.5 / (beta * beta) + var_V;

  const double h = 1e-4 * beta;
  const double d_mean_V = (mean_V(potential, beta - 2 * h) - 8.0 * mean_V(potential, beta - h) +
                           8.0 * mean_V(potential, beta + h) - mean_V(potential, beta + 2 * h)) /
                          (12.0 * h);
  t.chi_derivative = 0.5 / (beta * beta) - d_mean_V;
  return t;
}

double beta_of_energy(const Potential& potential, double energy) {
  if (!(energy > 0.0) || !std::isfinite(energy))
    throw ConfigError("beta_of_energy: energy must be positive");
  auto residual = [&](double beta) { return 0.5 / beta + mean_V(potential, beta) - energy; };
  double lo = 0.5 / energy;
  double hi = 2.0 / energy;
  // mean energy is strictly decreasing in beta
  int guard = 0;
  while (residual(lo) < 0.0 && guard++ < 200) lo *= 0.5;
  guard = 0;
  while (residual(hi) > 0.0 && guard++ < 200) hi *= 2.0;
  std::uintmax_t max_iter = 200;
  auto tol = boost::math::tools::eps_tolerance<double>(52);
  const auto [a, b] = boost::math::tools::toms748_solve(residual, lo, hi, tol, max_iter);
  const double beta = 0.5 * (a + b);
  if (std::fabs(residual(beta)) > 1e-10 * std::max(1.0, energy)) {
    std::ostringstream msg;
    msg << "beta_of_energy did not converge for E = " << energy << " (bracket [" << a << ", " << b
        << "])";
    throw RootFindError(msg.str());
  }
  return beta;
}

}  // namespace chainlab

#include "chainlab/observables.hpp"

#include <cmath>
#include <numbers>
#include <unsupported/Eigen/FFT>

#include "chainlab/error.hpp"

namespace chainlab {

std::vector<double> site_energies(const ChainState& state, const Potential& potential) {
  std::vector<double> out;
  site_energies(state, potential, out);
  return out;
}

void site_energies(const ChainState& state, const Potential& potential, std::vector<double>& out) {
  out.resize(state.size());
  for (std::size_t i = 0; i < state.size(); ++i)
    out[i] = 0.5 * state.p[i] * state.p[i] + potential.V(state.r[i]);
}

CurrentSample currents(const ChainState& state, const Potential& potential, double gamma) {
  const std::size_t n = state.size();
  CurrentSample out{std::vector<double>(n), std::vector<double>(n), std::vector<double>(n)};
  const double root_gamma = std::sqrt(gamma);
  for (std::size_t i = 0; i < n; ++i) {
    const double p = state.p[i];
    const double r = state.r[state.wrap(static_cast<std::ptrdiff_t>(i) + 1)];
    const double force = potential.dV(r);
    out.WA[i] = -p * force;
    out.WS[i] = 0.5 * gamma * (p * p * potential.d2V(r) - force * force);
    out.sigma[i] = root_gamma * p * force;
  }
  return out;
}

TestFunction TestFunction::constant(std::size_t n) {
  return {"constant", std::vector<double>(n, 1.0)};
}

TestFunction TestFunction::cosine_mode(int mode, std::size_t n) {
  return from_callable("cos" + std::to_string(mode),
                       [mode](double x) { return std::cos(2.0 * std::numbers::pi * mode * x); }, n);
}

TestFunction TestFunction::sine_mode(int mode, std::size_t n) {
  return from_callable("sin" + std::to_string(mode),
                       [mode](double x) { return std::sin(2.0 * std::numbers::pi * mode * x); }, n);
}

TestFunction TestFunction::from_callable(std::string name, const std::function<double(double)>& h,
                                         std::size_t n) {
  TestFunction out{std::move(name), std::vector<double>(n)};
  for (std::size_t i = 0; i < n; ++i) out.values[i] = h(static_cast<double>(i) / static_cast<double>(n));
  return out;
}

double TestFunction::mean_square() const {
  double s = 0.0;
  for (double v : values) s += v * v;
  return s / static_cast<double>(values.size());
}

double fluctuation_field(const std::vector<double>& energies, const TestFunction& h,
                         double mean_energy) {
  if (energies.size() != h.values.size()) throw Error("fluctuation_field: size mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < energies.size(); ++i) s += h.values[i] * (energies[i] - mean_energy);
  return s / std::sqrt(static_cast<double>(energies.size()));
}

double fluctuation_field(const ChainState& state, const Potential& potential,
                         const TestFunction& h, const ThermoSummary& thermo) {
  return fluctuation_field(site_energies(state, potential), h, thermo.mean_energy);
}

std::size_t CorrelationEstimate::column(int lag) const {
  const int lowest = lags.front();
  const int n = static_cast<int>(N);
  int wrapped = ((lag - lowest) % n + n) % n;
  return static_cast<std::size_t>(wrapped);
}

int poisson_one(RngStream& rng) {
  const double u = rng.uniform();
  double term = std::exp(-1.0);
  double cdf = term;
  int k = 0;
  while (u > cdf && k < 64) {
    ++k;
    term /= k;
    cdf += term;
  }
  return k;
}

ReplicaStats analyze_trajectory(const CorrelationSpec& spec,
                                const std::vector<std::vector<double>>& energy_snapshots) {
  using cvec = std::vector<std::complex<double>>;
  const std::size_t n = spec.N;
  const std::size_t snaps = energy_snapshots.size();
  if (snaps <= spec.max_lag || snaps <= spec.mode_max_lag)
    throw Error("analyze_trajectory: trajectory shorter than the requested lags");
  Eigen::FFT<double> fft;
  std::vector<cvec> spectra(snaps);
  std::vector<double> centered(n);
  for (std::size_t s = 0; s < snaps; ++s) {
    const auto& e = energy_snapshots[s];
    if (e.size() != n) throw Error("analyze_trajectory: snapshot has wrong size");
    for (std::size_t i = 0; i < n; ++i) centered[i] = e[i] - spec.mean_energy;
    fft.fwd(spectra[s], centered);
  }

  ReplicaStats out;
  out.corr.resize(static_cast<Eigen::Index>(spec.max_lag + 1), static_cast<Eigen::Index>(n));
  cvec cross(n);
  std::vector<double> profile(n);
  const std::size_t stride = std::max<std::size_t>(1, spec.origin_stride);
  for (std::size_t lag = 0; lag <= spec.max_lag; ++lag) {
    std::fill(cross.begin(), cross.end(), std::complex<double>(0.0, 0.0));
    std::size_t count = 0;
    for (std::size_t t0 = 0; t0 + lag < snaps; t0 += stride) {
      const cvec& later = spectra[t0 + lag];
      const cvec& earlier = spectra[t0];
      for (std::size_t k = 0; k < n; ++k) cross[k] += later[k] * std::conj(earlier[k]);
      ++count;
    }
    fft.inv(profile, cross);
    const double norm = 1.0 / (static_cast<double>(n) * static_cast<double>(count));
    for (std::size_t i = 0; i < n; ++i)
      out.corr(static_cast<Eigen::Index>(lag), static_cast<Eigen::Index>(i)) = profile[i] * norm;
  }

  const double root_n = std::sqrt(static_cast<double>(n));
  for (int mode : spec.modes) {
    const auto k = static_cast<std::size_t>(((mode % static_cast<int>(n)) + static_cast<int>(n)) %
                                            static_cast<int>(n));
    std::vector<double> yc(snaps), ys(snaps);
    ReplicaStats::Mode m;
    for (std::size_t s = 0; s < snaps; ++s) {
      yc[s] = spectra[s][k].real() / root_n;
      ys[s] = -spectra[s][k].imag() / root_n;
      m.mean_cos2 += yc[s] * yc[s];
      m.mean_sin2 += ys[s] * ys[s];
    }
    m.mean_cos2 /= static_cast<double>(snaps);
    m.mean_sin2 /= static_cast<double>(snaps);
    m.num = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(spec.mode_max_lag + 1));
    m.den = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(spec.mode_max_lag + 1));
    for (std::size_t lag = 0; lag <= spec.mode_max_lag; ++lag) {
      double num = 0.0, den = 0.0;
      for (std::size_t t0 = 0; t0 + lag < snaps; ++t0) {
        num += yc[t0] * yc[t0 + lag] + ys[t0] * ys[t0 + lag];
        den += yc[t0] * yc[t0] + ys[t0] * ys[t0];
      }
      m.num(static_cast<Eigen::Index>(lag)) = num;
      m.den(static_cast<Eigen::Index>(lag)) = den;
    }
    out.modes.push_back(std::move(m));
  }
  return out;
}

CorrelationAccumulator::CorrelationAccumulator(CorrelationSpec spec) : spec_(std::move(spec)) {
  const auto rows = static_cast<Eigen::Index>(spec_.max_lag + 1);
  const auto cols = static_cast<Eigen::Index>(spec_.N);
  corr_sum_ = Eigen::MatrixXd::Zero(rows, cols);
  corr_boot_.assign(spec_.bootstrap, Eigen::MatrixXd::Zero(rows, cols));
  weight_sum_.assign(spec_.bootstrap, 0.0);
  const auto mrows = static_cast<Eigen::Index>(spec_.mode_max_lag + 1);
  const auto boot = static_cast<Eigen::Index>(spec_.bootstrap);
  for (std::size_t k = 0; k < spec_.modes.size(); ++k) {
    ModeSums s;
    s.num = s.den = Eigen::VectorXd::Zero(mrows);
    s.num_boot = s.den_boot = Eigen::MatrixXd::Zero(boot, mrows);
    mode_sums_.push_back(std::move(s));
  }
}

void CorrelationAccumulator::add(std::uint64_t replica, const ReplicaStats& stats) {
  if (stats.modes.size() != mode_sums_.size()) throw Error("CorrelationAccumulator: mode mismatch");
  RngStream rng(spec_.bootstrap_seed, replica);
  RngStream weights_rng = rng.fork(0x626f6f74);
  std::vector<double> weights(spec_.bootstrap);
  for (double& w : weights) w = poisson_one(weights_rng);

  corr_sum_ += stats.corr;
  for (std::size_t b = 0; b < spec_.bootstrap; ++b) {
    weight_sum_[b] += weights[b];
    if (weights[b] != 0.0) corr_boot_[b] += weights[b] * stats.corr;
  }
  const Eigen::Map<const Eigen::VectorXd> w(weights.data(), static_cast<Eigen::Index>(weights.size()));
  for (std::size_t k = 0; k < mode_sums_.size(); ++k) {
    ModeSums& s = mode_sums_[k];
    const ReplicaStats::Mode& m = stats.modes[k];
    s.num += m.num;
    s.den += m.den;
    s.num_boot += w * m.num.transpose();
    s.den_boot += w * m.den.transpose();
    s.cos2 += m.mean_cos2;
    s.cos2_sq += m.mean_cos2 * m.mean_cos2;
    s.sin2 += m.mean_sin2;
    s.sin2_sq += m.mean_sin2 * m.mean_sin2;
  }
  ++replicas_;
}

CorrelationEstimate CorrelationAccumulator::correlation() const {
  if (replicas_ < 2) throw Error("correlation estimate needs at least 2 replicas");
  const std::size_t n = spec_.N;
  const int half = static_cast<int>(n / 2);
  CorrelationEstimate est;
  est.N = n;
  est.replicas = replicas_;
  for (int lag = half - static_cast<int>(n) + 1; lag <= half; ++lag) est.lags.push_back(lag);
  for (std::size_t t = 0; t <= spec_.max_lag; ++t) est.times.push_back(spec_.snapshot_dt * static_cast<double>(t));

  // Reorder circular offsets 0..N-1 into ascending wrapped lags.
  auto reorder = [&](const Eigen::MatrixXd& circular) {
    Eigen::MatrixXd out(circular.rows(), circular.cols());
    for (std::size_t c = 0; c < n; ++c) {
      const int lag = est.lags[c];
      const auto src = static_cast<Eigen::Index>(lag < 0 ? lag + static_cast<int>(n) : lag);
      out.col(static_cast<Eigen::Index>(c)) = circular.col(src);
    }
    return out;
  };
  const Eigen::MatrixXd mean = corr_sum_ / static_cast<double>(replicas_);
  est.C = reorder(mean);
  est.resamples.reserve(spec_.bootstrap);
  for (std::size_t b = 0; b < spec_.bootstrap; ++b) {
    if (weight_sum_[b] > 0.0) est.resamples.push_back(reorder(corr_boot_[b] / weight_sum_[b]));
    else est.resamples.push_back(est.C);
  }
  est.std_error = Eigen::MatrixXd::Zero(est.C.rows(), est.C.cols());
  if (est.resamples.size() >= 2) {
    Eigen::MatrixXd avg = Eigen::MatrixXd::Zero(est.C.rows(), est.C.cols());
    for (const auto& r : est.resamples) avg += r;
    avg /= static_cast<double>(est.resamples.size());
    for (const auto& r : est.resamples) est.std_error += (r - avg).cwiseAbs2();
    est.std_error = (est.std_error / static_cast<double>(est.resamples.size() - 1)).cwiseSqrt();
  }
  return est;
}

std::vector<ModeCorrelation> CorrelationAccumulator::modes() const {
  if (replicas_ < 2) throw Error("mode autocorrelation needs at least 2 replicas");
  std::vector<ModeCorrelation> out;
  const double m = static_cast<double>(replicas_);
  const double macro = 1.0 / (static_cast<double>(spec_.N) * static_cast<double>(spec_.N));
  for (std::size_t k = 0; k < mode_sums_.size(); ++k) {
    const ModeSums& s = mode_sums_[k];
    ModeCorrelation mc;
    mc.mode = spec_.modes[k];
    mc.replicas = replicas_;
    for (std::size_t t = 0; t <= spec_.mode_max_lag; ++t) {
      mc.times_micro.push_back(spec_.snapshot_dt * static_cast<double>(t));
      mc.times_macro.push_back(mc.times_micro.back() * macro);
    }
    mc.rho = s.num.cwiseQuotient(s.den);
    mc.rho_resamples = s.num_boot.cwiseQuotient(s.den_boot);
    for (Eigen::Index b = 0; b < mc.rho_resamples.rows(); ++b)
      if (!mc.rho_resamples.row(b).allFinite()) mc.rho_resamples.row(b) = mc.rho.transpose();
    mc.var_cos = s.cos2 / m;
    mc.var_sin = s.sin2 / m;
    mc.var_cos_se = std::sqrt(std::max(0.0, (s.cos2_sq / m - mc.var_cos * mc.var_cos) / (m - 1.0)));
    mc.var_sin_se = std::sqrt(std::max(0.0, (s.sin2_sq / m - mc.var_sin * mc.var_sin) / (m - 1.0)));
    out.push_back(std::move(mc));
  }
  return out;
}

}  // namespace chainlab

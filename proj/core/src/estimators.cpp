#include "chainlab/estimators.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "chainlab/dynamics.hpp"
#include "chainlab/ensemble.hpp"
#include "chainlab/error.hpp"
#include "chainlab/gibbs.hpp"

namespace chainlab {

std::string to_string(EstimateMethod method) {
  switch (method) {
    case EstimateMethod::green_kubo_slope:
      return "green_kubo_slope";
    case EstimateMethod::mode_relaxation:
      return "mode_relaxation";
    case EstimateMethod::variational:
      return "variational";
  }
  return "unknown";
}

Eigen::VectorXd second_moment(const Eigen::MatrixXd& C, const std::vector<int>& lags) {
  Eigen::VectorXd weights(static_cast<Eigen::Index>(lags.size()));
  for (std::size_t k = 0; k < lags.size(); ++k) weights(static_cast<Eigen::Index>(k)) = double(lags[k]) * lags[k];
  return C * weights;
}

namespace {

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double residual_rms = 0.0;
};

/// Weighted least squares y = intercept + slope * x.
LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y, const std::vector<double>& w) {
  double sw = 0, sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    sw += w[k];
    sx += w[k] * x[k];
    sy += w[k] * y[k];
    sxx += w[k] * x[k] * x[k];
    sxy += w[k] * x[k] * y[k];
  }
  const double det = sw * sxx - sx * sx;
  if (!(det > 0.0)) throw FitError("degenerate regression design");
  LineFit f;
  f.slope = (sw * sxy - sx * sy) / det;
  f.intercept = (sy - f.slope * sx) / sw;
  double rss = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    const double e = y[k] - f.intercept - f.slope * x[k];
    rss += e * e;
  }
  f.residual_rms = std::sqrt(rss / static_cast<double>(x.size()));
  return f;
}

double sample_sd(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

/// Indices of the contiguous run where lo <= y <= hi, starting at the first y <= hi.
std::pair<std::size_t, std::size_t> decay_window(const Eigen::VectorXd& y, double lo, double hi,
                                                 bool& truncated) {
  const auto n = static_cast<std::size_t>(y.size());
  std::size_t first = 1;
  while (first < n && y(static_cast<Eigen::Index>(first)) > hi) ++first;
  std::size_t last = first;
  while (last < n && y(static_cast<Eigen::Index>(last)) >= lo) ++last;
  truncated = last == n;
  return {first, last};
}

}  // namespace

DiffusivityEstimate green_kubo_diffusivity(const CorrelationEstimate& C, const ThermoSummary& thermo,
                                           const GreenKuboOptions& options) {
  const auto rows = static_cast<std::size_t>(C.C.rows());
  if (rows < 5) throw FitError("green-kubo fit needs at least 5 time points");
  const Eigen::VectorXd m = second_moment(C.C, C.lags);
  std::vector<Eigen::VectorXd> boot;
  for (const auto& r : C.resamples) boot.push_back(second_moment(r, C.lags));

  const double t_max = C.times.back();
  const double lo = options.window_lo_fraction * t_max;
  const double hi = options.window_hi_fraction * t_max;
  std::vector<std::size_t> idx;
  for (std::size_t k = 0; k < rows; ++k)
    if (C.times[k] >= lo - 1e-12 && C.times[k] <= hi + 1e-12 && C.times[k] > 0.0) idx.push_back(k);
  if (idx.size() < 5) throw FitError("green-kubo window holds fewer than 5 time points");

  std::vector<double> x, y, w;
  for (std::size_t k : idx) {
    std::vector<double> samples;
    for (const auto& b : boot) samples.push_back(b(static_cast<Eigen::Index>(k)));
    const double se = sample_sd(samples);
    x.push_back(C.times[k]);
    y.push_back(m(static_cast<Eigen::Index>(k)));
    w.push_back(se > 0.0 ? 1.0 / (se * se) : 1.0);
  }
  const LineFit fit = fit_line(x, y, w);
  const double scale = 1.0 / (2.0 * thermo.chi);

  std::vector<double> d_boot;
  for (const auto& b : boot) {
    std::vector<double> yb;
    for (std::size_t k : idx) yb.push_back(b(static_cast<Eigen::Index>(k)));
    d_boot.push_back(fit_line(x, yb, w).slope * scale);
  }

  DiffusivityEstimate est;
  est.method = EstimateMethod::green_kubo_slope;
  est.D_hat = fit.slope * scale;
  est.std_error = sample_sd(d_boot);
  est.window_lo = x.front();
  est.window_hi = x.back();
  std::vector<double> m0;
  for (const auto& b : boot) m0.push_back(b(0));
  est.diagnostics = {{"slope", fit.slope},
                     {"intercept", fit.intercept},
                     {"points", static_cast<double>(idx.size())},
                     {"m0", m(0)},
                     {"m0_stderr", sample_sd(m0)},
                     {"chi", thermo.chi},
                     {"spread", std::sqrt(std::max(0.0, 2.0 * est.D_hat * t_max))},
                     {"replicas", static_cast<double>(C.replicas)}};
  if (!(fit.slope > 0.0)) throw FitError("green-kubo slope is not positive");
  const double spread = std::sqrt(2.0 * est.D_hat * t_max);
  if (spread >= static_cast<double>(C.N) / 4.0) {
    std::ostringstream msg;
    msg << "spread guard violated: sqrt(2 D t_max) = " << spread << " >= N/4 = " << C.N / 4.0;
    throw FitError(msg.str());
  }
  return est;
}

DiffusivityEstimate mode_relaxation(const ModeCorrelation& mode, const ModeFitOptions& options) {
  bool truncated = false;
  const auto [first, last] = decay_window(mode.rho, options.rho_lo, options.rho_hi, truncated);
  if (last <= first || last - first < options.min_points)
    throw FitError("insufficient decay in the mode relaxation window");
  std::vector<double> x, y, w(last - first, 1.0);
  for (std::size_t k = first; k < last; ++k) {
    const double r = mode.rho(static_cast<Eigen::Index>(k));
    if (!(r > 0.0)) throw FitError("mode autocorrelation is not positive inside the window");
    x.push_back(mode.times_macro[k]);
    y.push_back(std::log(r));
  }
  const LineFit fit = fit_line(x, y, w);
  const double k2 = std::pow(2.0 * std::numbers::pi * mode.mode, 2);
  std::vector<double> d_boot;
  for (Eigen::Index b = 0; b < mode.rho_resamples.rows(); ++b) {
    std::vector<double> yb;
    bool ok = true;
    for (std::size_t k = first; k < last; ++k) {
      const double r = mode.rho_resamples(b, static_cast<Eigen::Index>(k));
      if (!(r > 0.0)) {
        ok = false;
        break;
      }
      yb.push_back(std::log(r));
    }
    if (ok) d_boot.push_back(-fit_line(x, yb, w).slope / k2);
  }
  DiffusivityEstimate est;
  est.method = EstimateMethod::mode_relaxation;
  est.D_hat = -fit.slope / k2;
  est.std_error = sample_sd(d_boot);
  est.window_lo = x.front();
  est.window_hi = x.back();
  est.diagnostics = {{"mode", static_cast<double>(mode.mode)},
                     {"rate", -fit.slope},
                     {"rate_stderr", est.std_error * k2},
                     {"intercept", fit.intercept},
                     {"points", static_cast<double>(x.size())},
                     {"rho_first", mode.rho(static_cast<Eigen::Index>(first))},
                     {"rho_last", mode.rho(static_cast<Eigen::Index>(last - 1))},
                     {"window_truncated", truncated ? 1.0 : 0.0},
                     {"log_residual_rms", fit.residual_rms}};
  if (!(est.D_hat > 0.0)) throw FitError("mode relaxation rate is not positive");
  return est;
}

KappaBounds kappa_bounds(const ThermoSummary& thermo, double gamma) {
  if (!(gamma > 0.0)) throw Error("kappa_bounds: gamma must be positive");
  KappaBounds b;
  b.beta = thermo.beta;
  b.gamma = gamma;
  b.lower = gamma / (4.0 * thermo.beta * thermo.mean_r2);
  b.upper = gamma * thermo.mean_d2V / 4.0 + 3.0 / (4.0 * gamma);
  return b;
}

double heat_kernel_l1(const CorrelationEstimate& C, const ThermoSummary& thermo, double D_hat,
                      std::size_t row) {
  const double t = C.times.at(row);
  if (!(t > 0.0) || !(D_hat > 0.0)) throw Error("heat_kernel_l1: needs t > 0 and D > 0");
  const double variance = 2.0 * D_hat * t;
  std::vector<double> kernel(C.lags.size());
  double norm = 0.0;
  for (std::size_t k = 0; k < C.lags.size(); ++k) {
    kernel[k] = std::exp(-0.5 * C.lags[k] * C.lags[k] / variance);
    norm += kernel[k];
  }
  double l1 = 0.0;
  for (std::size_t k = 0; k < C.lags.size(); ++k)
    l1 += std::abs(C.C(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(k)) / thermo.chi -
                   kernel[k] / norm);
  return l1;
}

std::vector<GapRow> gap_relaxation(const Potential& potential, const std::vector<std::size_t>& L_values,
                                   double energy, const GapOptions& options) {
  if (!(energy > 0.0)) throw Error("gap_relaxation: energy must be positive");
  if (options.replicas < 2) throw Error("gap_relaxation: needs at least 2 replicas");
  std::vector<GapRow> rows;
  for (std::size_t L : L_values) {
    if (L < 1) throw Error("gap_relaxation: L must be positive");
    const double horizon = options.horizon_factor * static_cast<double>(L * L) / options.gamma;
    const auto sweeps_per_record = static_cast<std::size_t>(
        std::max(1.0, std::round(horizon / (static_cast<double>(options.records) * options.dt))));
    const double record_dt = static_cast<double>(sweeps_per_record) * options.dt;
    std::vector<double> profile(L);
    for (std::size_t i = 0; i < L; ++i)
      profile[i] = L == 1 ? 1.0 : std::cos(std::numbers::pi * (static_cast<double>(i) + 0.5) / static_cast<double>(L));

    // L = 1 has no profile; track the kinetic energy p_0^2 / 2 instead.
    auto observable = [&](const ChainState& s) {
      double a = 0.0;
      if (L == 1) return 0.5 * s.p[0] * s.p[0] - 0.5 * energy;
      for (std::size_t i = 0; i < L; ++i) a += profile[i] * (0.5 * s.p[i] * s.p[i] + potential.V(s.r[i]));
      return a;
    };

    const std::uint64_t seed = options.seed + 0x1000003ULL * L;
    auto work = [&](std::size_t m) {
      RngStream rng(seed, m);
      ChainState state(L);
      ChainState twin;
      if (L == 1) {
        const double angle = 2.0 * std::numbers::pi * rng.uniform();
        state.p[0] = std::sqrt(2.0 * energy);
        state.r[0] = 0.0;
        flow_x(state, 0, angle, potential);
        // Start from the kinetic-heavy half of the circle so the mean is off equilibrium.
        if (std::abs(state.p[0]) < std::sqrt(energy)) flow_x(state, 0, 0.5 * std::numbers::pi, potential);
      } else {
        state = sample_microcanonical(potential, L, energy, rng, options.mixing_sweeps, Topology::open);
        if (options.paired_control) twin = state;
        for (std::size_t i = 0; i < L; ++i) {
          const double e = 0.5 * state.p[i] * state.p[i] + potential.V(state.r[i]);
          set_site_energy(state.p[i], state.r[i], potential, e * (1.0 + options.amplitude * profile[i]));
        }
      }
      // The unperturbed twin sees the same orders and increments. Its profile has mean zero
      // at every time by reflection symmetry, so subtracting it leaves the mean unchanged.
      const bool paired = !twin.p.empty();
      auto value = [&] { return paired ? observable(state) - observable(twin) : observable(state); };
      NoiseSweeper sweeper(potential, Topology::open);
      std::vector<double> series(options.records + 1);
      series[0] = value();
      for (std::size_t k = 1; k <= options.records; ++k) {
        for (std::size_t s = 0; s < sweeps_per_record; ++s) {
          if (paired) {
            RngStream copy = rng;
            sweeper.sweep(twin, options.dt, options.gamma, copy);
          }
          sweeper.sweep(state, options.dt, options.gamma, rng);
        }
        series[k] = value();
      }
      return series;
    };

    const auto n = static_cast<Eigen::Index>(options.records + 1);
    Eigen::VectorXd sum = Eigen::VectorXd::Zero(n);
    Eigen::MatrixXd boot = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(options.bootstrap), n);
    Eigen::VectorXd boot_w = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(options.bootstrap));
    replicate(options.replicas, options.parallelism, work, [&](std::size_t m, std::vector<double>&& s) {
      const Eigen::Map<const Eigen::VectorXd> v(s.data(), n);
      sum += v;
      RngStream wr = RngStream(seed ^ 0x5bd1e995ULL, m).fork(0x626f6f74);
      for (Eigen::Index b = 0; b < boot.rows(); ++b) {
        const double w = poisson_one(wr);
        boot_w(b) += w;
        if (w != 0.0) boot.row(b) += w * v.transpose();
      }
    });
    Eigen::VectorXd rho = sum / sum(0);
    GapRow row;
    row.L = L;
    row.energy = energy;
    for (Eigen::Index k = 0; k < n; ++k) {
      row.times.push_back(record_dt * static_cast<double>(k));
      row.rho.push_back(rho(k));
    }
    bool truncated = false;
    const auto [first, last] = decay_window(rho, options.rho_lo, options.rho_hi, truncated);
    if (last <= first || last - first < 5) throw FitError("gap relaxation: insufficient decay for L = " + std::to_string(L));
    std::vector<double> x, y, w(last - first, 1.0);
    for (std::size_t k = first; k < last; ++k) {
      x.push_back(row.times[k]);
      y.push_back(std::log(row.rho[k]));
    }
    const LineFit fit = fit_line(x, y, w);
    if (!(fit.slope < 0.0)) throw FitError("gap relaxation: profile does not decay for L = " + std::to_string(L));
    row.tau_hat = -1.0 / fit.slope;
    row.fit_lo = x.front();
    row.fit_hi = x.back();
    row.log_residual_rms = fit.residual_rms;
    std::vector<double> tau_boot;
    for (Eigen::Index b = 0; b < boot.rows(); ++b) {
      if (boot_w(b) == 0.0) continue;
      const Eigen::VectorXd rb = boot.row(b).transpose() / boot(b, 0);
      std::vector<double> yb;
      bool ok = true;
      for (std::size_t k = first; k < last; ++k) {
        const double r = rb(static_cast<Eigen::Index>(k));
        if (!(r > 0.0)) {
          ok = false;
          break;
        }
        yb.push_back(std::log(r));
      }
      if (!ok) continue;
      const double s = fit_line(x, yb, w).slope;
      if (s < 0.0) tau_boot.push_back(-1.0 / s);
    }
    row.std_error = sample_sd(tau_boot);
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace chainlab

#include "chainlab/experiments.hpp"

#include <Eigen/Core>
#include <boost/version.hpp>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <sstream>

#include "chainlab/csv.hpp"
#include "chainlab/dynamics.hpp"
#include "chainlab/ensemble.hpp"
#include "chainlab/error.hpp"
#include "chainlab/estimators.hpp"
#include "chainlab/gibbs.hpp"
#include "chainlab/observables.hpp"
#include "chainlab/symbolic.hpp"
#include "chainlab/variational.hpp"

#ifndef CHAINLAB_VERSION_STRING
#define CHAINLAB_VERSION_STRING "unknown"
#endif

namespace chainlab {

namespace fs = std::filesystem;

std::string library_version() { return CHAINLAB_VERSION_STRING; }

namespace {

std::string compiler_text() {
#if defined(__clang__)
  return "clang " __clang_version__;
#elif defined(__GNUC__)
  return "gcc " __VERSION__;
#else
  return "unknown";
#endif
}

struct Context {
  const RunConfig& config;
  const RunOptions& options;
  fs::path dir;
  RunOutcome& outcome;
  Potential potential;
  std::vector<std::pair<std::string, std::string>> facts;

  std::ofstream open(const std::string& name) {
    std::ofstream f(dir / name);
    if (!f) throw Error("cannot write " + (dir / name).string());
    outcome.files.push_back(name);
    return f;
  }
  void check(bool ok, const std::string& what) {
    if (!ok) outcome.failures.push_back(what);
  }
  void say(const std::string& line) {
    outcome.summary.push_back(line);
    if (options.log) *options.log << line << '\n';
  }
  void fact(const std::string& key, double value) { facts.emplace_back(key, format_double(value)); }
  void fact(const std::string& key, const std::string& value) { facts.emplace_back(key, value); }

  double n2() const { return static_cast<double>(config.N) * static_cast<double>(config.N); }
};

std::string fmt(double v) { return format_double(v); }

void write_plot(Context& ctx, const std::string& name, const std::string& body) {
  auto f = ctx.open("plot-" + name + ".txt");
  f << "# gnuplot script; run from the output directory\n"
    << "set datafile separator ','\n"
    << "set key autotitle columnhead\n"
    << "set terminal pngcairo size 900,600\n"
    << "set output '" << name << ".png'\n"
    << body << "\n";
}

SimParams make_sim(const Context& ctx) {
  SimParams s;
  s.beta = resolve_beta(ctx.config, ctx.potential);
  s.gamma = ctx.config.gamma.value_or(0.0);
  s.N = ctx.config.N;
  s.dt_micro = ctx.config.dt_micro;
  s.substeps_flow = ctx.config.substeps_flow;
  s.seed = ctx.config.seed;
  s.potential = ctx.potential;
  return s;
}

EnsembleSpec make_ensemble(Context& ctx) {
  EnsembleSpec e;
  e.sim = make_sim(ctx);
  e.replicas = ctx.config.replicas;
  e.horizon_micro = *ctx.config.t_macro * ctx.n2();
  e.snapshot_micro = *ctx.config.snapshot_macro * ctx.n2();
  e.max_lag_micro = ctx.config.lag_macro.value_or(*ctx.config.t_macro) * ctx.n2();
  e.mode_max_lag_micro = ctx.config.mode_lag_macro.value_or(*ctx.config.t_macro) * ctx.n2();
  e.origin_stride = ctx.config.origin_stride;
  e.modes = ctx.config.modes;
  e.bootstrap = ctx.config.bootstrap;
  e.parallelism = ctx.options.parallelism;
  ctx.fact("t_macro", *ctx.config.t_macro);
  ctx.fact("t_micro", e.horizon_micro);
  return e;
}

void write_thermo_row(CsvWriter& w, const ThermoSummary& t) {
  w << t.beta << t.Z_beta << t.mean_V << t.mean_energy << t.chi << t.chi_derivative << t.mean_d2V
    << t.mean_r2 << t.mean_dV2 << t.mean_dV_r;
  w.end_row();
}

const std::vector<std::string> kThermoColumns = {"beta",     "Z_beta",   "mean_V",   "mean_energy",
                                                  "chi",      "chi_derivative", "mean_d2V", "mean_r2",
                                                  "mean_dV2", "mean_dV_r"};

void run_thermo(Context& ctx) {
  const double beta = resolve_beta(ctx.config, ctx.potential);
  const ThermoSummary t = thermo(ctx.potential, beta);
  auto f = ctx.open("thermo.csv");
  CsvWriter w(f, kThermoColumns);
  write_thermo_row(w, t);
  const double chi_gap = std::abs(t.chi - t.chi_derivative) / t.chi;
  const double ibp_gap = std::abs(t.mean_dV_r * beta - 1.0);
  ctx.check(chi_gap <= 1e-8, "chi cross-check relative gap " + fmt(chi_gap) + " > 1e-8");
  ctx.check(ibp_gap <= 1e-8, "<V'(r) r> beta - 1 = " + fmt(ibp_gap) + " exceeds 1e-8");
  ctx.say("beta = " + fmt(beta) + ", mean energy = " + fmt(t.mean_energy) + ", chi = " + fmt(t.chi));
}

void run_sample(Context& ctx) {
  RngStream rng(ctx.config.seed, 0);
  ChainState state;
  if (ctx.config.energy && !ctx.config.beta) {
    state = sample_microcanonical(ctx.potential, ctx.config.N, *ctx.config.energy, rng, ctx.config.mixing_sweeps);
    const double total = total_energy(state, ctx.potential);
    const double target = static_cast<double>(ctx.config.N) * *ctx.config.energy;
    ctx.check(std::abs(total - target) <= 1e-9 * target, "microcanonical total energy off the surface");
    ctx.say("microcanonical sample, total energy = " + fmt(total));
  } else {
    state = sample_gibbs(ctx.potential, resolve_beta(ctx.config, ctx.potential), ctx.config.N, rng);
    ctx.say("Gibbs sample, total energy = " + fmt(total_energy(state, ctx.potential)));
  }
  {
    auto f = ctx.open("snapshot.csv");
    write_snapshot_csv(f, state);
  }
  {
    std::ofstream f(ctx.dir / "snapshot.bin", std::ios::binary);
    if (!f) throw Error("cannot write snapshot.bin");
    ctx.outcome.files.push_back("snapshot.bin");
    write_snapshot_binary(f, state);
  }
  auto f = ctx.open("sample.csv");
  CsvWriter w(f, {"site", "p", "r", "energy"});
  const auto e = site_energies(state, ctx.potential);
  for (std::size_t i = 0; i < state.size(); ++i) {
    w << static_cast<long long>(i) << state.p[i] << state.r[i] << e[i];
    w.end_row();
  }
}

void run_evolve(Context& ctx) {
  SimParams sim = make_sim(ctx);
  const double horizon = *ctx.config.t_macro * ctx.n2();
  const double snapshot = *ctx.config.snapshot_macro * ctx.n2();
  const std::size_t per_snap = whole_steps(snapshot, sim.dt_micro, "snapshot stride");
  const std::size_t snaps = whole_steps(horizon, snapshot, "horizon");
  ctx.fact("t_macro", *ctx.config.t_macro);
  ctx.fact("t_micro", horizon);
  const ThermoSummary t = thermo(ctx.potential, sim.beta);
  RngStream rng(sim.seed, 0);
  ChainState state = sample_gibbs(ctx.potential, sim.beta, sim.N, rng);
  Integrator integrator(sim);

  std::vector<std::string> cols = {"t_macro", "t_micro"};
  for (std::size_t i = 0; i < sim.N; ++i) cols.push_back("e" + std::to_string(i));
  auto traj_file = ctx.open("trajectory.csv");
  CsvWriter traj(traj_file, cols);
  auto steps_file = ctx.open("steps.csv");
  CsvWriter steps(steps_file, {"t_micro", "H_before", "H_after", "flow_projection_residual"});
  std::vector<TestFunction> fields;
  for (int n : ctx.config.modes) {
    fields.push_back(TestFunction::cosine_mode(n, sim.N));
    fields.push_back(TestFunction::sine_mode(n, sim.N));
  }
  auto field_file = ctx.open("fields.csv");
  CsvWriter field(field_file, {"t_macro", "test_function", "Y"});

  const double h0 = total_energy(state, ctx.potential);
  double worst_drift = 0.0;
  auto record = [&](std::size_t s) {
    const double tm = snapshot * static_cast<double>(s);
    const auto e = site_energies(state, ctx.potential);
    traj << tm / ctx.n2() << tm;
    for (double v : e) traj << v;
    traj.end_row();
    for (const auto& h : fields) {
      field << tm / ctx.n2() << h.name << fluctuation_field(e, h, t.mean_energy);
      field.end_row();
    }
  };
  record(0);
  for (std::size_t s = 1; s <= snaps; ++s) {
    if (per_snap > 1) integrator.advance(state, rng, per_snap - 1);
    const StepReport rep = integrator.step(state, rng);
    steps << snapshot * static_cast<double>(s) << rep.H_before << rep.H_after << rep.flow_projection_residual;
    steps.end_row();
    worst_drift = std::max(worst_drift, std::abs(rep.H_after - h0) / h0);
    record(s);
  }
  ctx.check(std::isfinite(worst_drift), "trajectory became non-finite");
  ctx.say("evolved " + fmt(horizon) + " microscopic time units; max |H - H0|/H0 = " + fmt(worst_drift));
  write_plot(ctx, "fields",
             "plot for [name in \"" + std::string(fields.empty() ? "" : fields.front().name) +
                 "\"] 'fields.csv' using 1:($2 eq name ? $3 : 1/0) with lines title name");
}

void write_correlation(Context& ctx, const CorrelationEstimate& c) {
  auto f = ctx.open("correlation.csv");
  CsvWriter w(f, {"t_micro", "t_macro", "i", "C", "stderr"});
  for (std::size_t t = 0; t < c.times.size(); ++t)
    for (std::size_t k = 0; k < c.lags.size(); ++k) {
      const auto r = static_cast<Eigen::Index>(t), col = static_cast<Eigen::Index>(k);
      w << c.times[t] << c.times[t] / ctx.n2() << static_cast<long long>(c.lags[k]) << c.C(r, col)
        << c.std_error(r, col);
      w.end_row();
    }
  write_plot(ctx, "correlation",
             "set xlabel 'i'\nset ylabel 'C(i,0,t)'\n"
             "plot 'correlation.csv' using 3:($1 == " + fmt(c.times.back()) +
                 " ? $4 : 1/0) with points title 'largest lag'");
}

void write_modes(Context& ctx, const std::vector<ModeCorrelation>& modes) {
  auto f = ctx.open("modes_rho.csv");
  CsvWriter w(f, {"mode", "t_micro", "t_macro", "rho", "stderr"});
  for (const auto& m : modes) {
    for (Eigen::Index k = 0; k < m.rho.size(); ++k) {
      const Eigen::VectorXd col = m.rho_resamples.col(k);
      const double mean = col.mean();
      const double sd = col.size() > 1 ? std::sqrt((col.array() - mean).square().sum() / double(col.size() - 1)) : 0.0;
      w << static_cast<long long>(m.mode) << m.times_micro[static_cast<std::size_t>(k)]
        << m.times_macro[static_cast<std::size_t>(k)] << m.rho(k) << sd;
      w.end_row();
    }
  }
  write_plot(ctx, "modes",
             "set logscale y\nset xlabel 't (macroscopic)'\nset ylabel 'rho_n(t)'\n"
             "plot 'modes_rho.csv' using 3:($1 == 1 ? $4 : 1/0) with lines title 'n = 1', "
             "'' using 3:($1 == 2 ? $4 : 1/0) with lines title 'n = 2'");
}

void write_estimates(Context& ctx, const std::vector<DiffusivityEstimate>& est, const ThermoSummary& t) {
  auto f = ctx.open("estimates.csv");
  CsvWriter w(f, {"method", "mode", "D_hat", "stderr", "window_lo", "window_hi", "kappa_hat", "kappa_stderr"});
  const double k = t.beta * t.beta * t.chi;
  for (const auto& e : est) {
    const auto it = e.diagnostics.find("mode");
    w << to_string(e.method) << static_cast<long long>(it == e.diagnostics.end() ? 0 : it->second) << e.D_hat
      << e.std_error << e.window_lo << e.window_hi << e.D_hat * k << e.std_error * k;
    w.end_row();
  }
  auto d = ctx.open("diagnostics.txt");
  d << "{\n";
  for (std::size_t n = 0; n < est.size(); ++n) {
    d << "  \"" << to_string(est[n].method) << "\": {";
    bool first = true;
    for (const auto& [key, value] : est[n].diagnostics) {
      d << (first ? "" : ",") << "\n    \"" << key << "\": " << fmt(value);
      first = false;
    }
    d << "\n  }" << (n + 1 < est.size() ? "," : "") << "\n";
  }
  d << "}\n";
}

void check_correlation(Context& ctx, const CorrelationEstimate& c, const ThermoSummary& t) {
  for (std::size_t k = 0; k < c.lags.size(); ++k) {
    const double expected = c.lags[k] == 0 ? t.chi : 0.0;
    const double se = c.std_error(0, static_cast<Eigen::Index>(k));
    if (std::abs(c.C(0, static_cast<Eigen::Index>(k)) - expected) > 4.0 * se) {
      ctx.check(false, "C(" + std::to_string(c.lags[k]) + ",0,0) deviates from chi delta by more than 4 stderr");
      break;
    }
  }
  // Total correlation: sum over offsets compared with its t = 0 value through the bootstrap.
  for (std::size_t r = 1; r < c.times.size(); ++r) {
    const double diff = c.C.row(static_cast<Eigen::Index>(r)).sum() - c.C.row(0).sum();
    std::vector<double> d;
    for (const auto& b : c.resamples) d.push_back(b.row(static_cast<Eigen::Index>(r)).sum() - b.row(0).sum());
    double mean = 0, ss = 0;
    for (double x : d) mean += x;
    mean /= double(d.size());
    for (double x : d) ss += (x - mean) * (x - mean);
    const double se = std::sqrt(ss / double(d.size() - 1));
    if (std::abs(diff) > 4.0 * se) {
      ctx.check(false, "sum_i C(i,0,t) drifts by more than 4 stderr at t = " + fmt(c.times[r]));
      break;
    }
  }
}

void run_correlate(Context& ctx) {
  const EnsembleResult r = run_equilibrium_ensemble(make_ensemble(ctx));
  write_correlation(ctx, r.correlation);
  write_modes(ctx, r.modes);
  check_correlation(ctx, r.correlation, r.thermo);
  ctx.say("C(0,0,0) = " + fmt(r.correlation.C(0, static_cast<Eigen::Index>(r.correlation.column(0)))) +
          " (chi = " + fmt(r.thermo.chi) + "), replicas = " + std::to_string(r.correlation.replicas));
}

void write_second_moment(Context& ctx, const CorrelationEstimate& c) {
  const Eigen::VectorXd m = second_moment(c.C, c.lags);
  auto f = ctx.open("second_moment.csv");
  CsvWriter w(f, {"t_micro", "t_macro", "m", "stderr"});
  std::vector<Eigen::VectorXd> boot;
  for (const auto& b : c.resamples) boot.push_back(second_moment(b, c.lags));
  for (Eigen::Index t = 0; t < m.size(); ++t) {
    double mean = 0, ss = 0;
    for (const auto& b : boot) mean += b(t);
    mean /= double(boot.size());
    for (const auto& b : boot) ss += (b(t) - mean) * (b(t) - mean);
    w << c.times[static_cast<std::size_t>(t)] << c.times[static_cast<std::size_t>(t)] / ctx.n2() << m(t)
      << std::sqrt(ss / double(boot.size() - 1));
    w.end_row();
  }
  write_plot(ctx, "second-moment",
             "set xlabel 't (microscopic)'\nset ylabel 'sum_i i^2 C(i,0,t)'\n"
             "plot 'second_moment.csv' using 1:3:4 with yerrorbars title 'm(t)'");
}

void run_green_kubo(Context& ctx) {
  const EnsembleResult r = run_equilibrium_ensemble(make_ensemble(ctx));
  write_correlation(ctx, r.correlation);
  write_second_moment(ctx, r.correlation);
  check_correlation(ctx, r.correlation, r.thermo);
  std::vector<DiffusivityEstimate> est;
  try {
    est.push_back(green_kubo_diffusivity(r.correlation, r.thermo,
                                         {ctx.config.gk_window_lo, ctx.config.gk_window_hi}));
    const DiffusivityEstimate& gk = est.back();
    ctx.say("Green-Kubo D = " + fmt(gk.D_hat) + " +- " + fmt(gk.std_error));
    const double l1 = heat_kernel_l1(r.correlation, r.thermo, gk.D_hat, r.correlation.times.size() - 1);
    ctx.fact("heat_kernel_l1", l1);
    ctx.say("heat-kernel L1 distance at the largest lag = " + fmt(l1));
  } catch (const FitError& e) {
    ctx.check(false, std::string("green-kubo fit failed: ") + e.what());
  }
  if (!r.modes.empty()) {
    write_modes(ctx, r.modes);
    for (const auto& m : r.modes) {
      try {
        est.push_back(mode_relaxation(m, {ctx.config.rho_lo, ctx.config.rho_hi}));
        ctx.say("mode " + std::to_string(m.mode) + " D = " + fmt(est.back().D_hat) + " +- " +
                fmt(est.back().std_error));
      } catch (const FitError& e) {
        ctx.say("mode " + std::to_string(m.mode) + " fit skipped: " + e.what());
      }
    }
  }
  write_estimates(ctx, est, r.thermo);
}

void run_modes(Context& ctx) {
  const EnsembleResult r = run_equilibrium_ensemble(make_ensemble(ctx));
  write_modes(ctx, r.modes);
  std::vector<DiffusivityEstimate> est;
  for (const auto& m : r.modes) {
    const double target = r.thermo.chi / 2.0;
    ctx.check(std::abs(m.var_cos - target) <= 4.0 * m.var_cos_se && std::abs(m.var_sin - target) <= 4.0 * m.var_sin_se,
              "static variance of mode " + std::to_string(m.mode) + " deviates from chi/2 by more than 4 stderr");
    try {
      est.push_back(mode_relaxation(m, {ctx.config.rho_lo, ctx.config.rho_hi}));
      ctx.say("mode " + std::to_string(m.mode) + " rate = " + fmt(est.back().diagnostics.at("rate")) +
              " per macroscopic time, D = " + fmt(est.back().D_hat) + " +- " + fmt(est.back().std_error));
    } catch (const FitError& e) {
      ctx.check(false, "mode " + std::to_string(m.mode) + " fit failed: " + e.what());
    }
  }
  write_estimates(ctx, est, r.thermo);
}

void run_bounds(Context& ctx) {
  const double beta = resolve_beta(ctx.config, ctx.potential);
  const ThermoSummary t = thermo(ctx.potential, beta);
  const KappaBounds b = kappa_bounds(t, *ctx.config.gamma);
  auto f = ctx.open("bounds.csv");
  CsvWriter w(f, {"beta", "gamma", "lower", "upper"});
  w << b.beta << b.gamma << b.lower << b.upper;
  w.end_row();
  ctx.check(b.lower <= b.upper, "lower bound exceeds upper bound");
  ctx.say("kappa bounds [" + fmt(b.lower) + ", " + fmt(b.upper) + "]");
}

void run_saddle(Context& ctx) {
  const double beta = resolve_beta(ctx.config, ctx.potential);
  const double gamma = *ctx.config.gamma;
  const KappaBounds b = kappa_bounds(thermo(ctx.potential, beta), gamma);
  auto f = ctx.open("saddle.csv");
  CsvWriter w(f, {"window", "degree", "kappa_hat", "lower", "upper", "f_size", "g_size", "rank_f", "rank_g",
                  "cond_f", "cond_g", "rank_deficient"});
  auto poly = ctx.open("saddle_polynomials.txt");
  std::vector<int> windows = ctx.config.windows;
  std::sort(windows.begin(), windows.end());
  double previous = std::numeric_limits<double>::infinity();
  for (int k : windows) {
    const SaddleSolution s = solve_saddle(ctx.potential, beta, gamma, k, ctx.config.degree);
    w << static_cast<long long>(k) << static_cast<long long>(s.degree) << s.kappa_hat << b.lower << b.upper
      << static_cast<long long>(s.f_basis.size()) << static_cast<long long>(s.g_basis.size())
      << static_cast<long long>(s.rank_f) << static_cast<long long>(s.rank_g) << s.cond_f << s.cond_g
      << static_cast<long long>(s.rank_deficient ? 1 : 0);
    w.end_row();
    poly << "[window " << k << ", degree " << s.degree << "]\n"
         << "kappa_hat = " << fmt(s.kappa_hat) << "\n"
         << "f = " << s.f.str() << "\n"
         << "g = " << s.g.str() << "\n\n";
    ctx.check(s.kappa_hat >= b.lower - 1e-10 && s.kappa_hat <= b.upper + 1e-10,
              "Galerkin estimate " + fmt(s.kappa_hat) + " outside the bounds at window " + std::to_string(k));
    ctx.check(s.kappa_hat <= previous + 1e-10 * std::max(1.0, previous),
              "Galerkin estimate increased at window " + std::to_string(k));
    previous = s.kappa_hat;
    ctx.say("window " + std::to_string(k) + ": kappa_hat = " + fmt(s.kappa_hat));
  }
}

void run_gap(Context& ctx) {
  GapOptions o;
  o.replicas = ctx.config.replicas;
  o.amplitude = ctx.config.gap_amplitude;
  o.dt = ctx.config.gap_dt;
  o.gamma = *ctx.config.gamma;
  o.horizon_factor = ctx.config.gap_horizon_factor;
  o.records = ctx.config.gap_records;
  o.mixing_sweeps = ctx.config.mixing_sweeps;
  o.bootstrap = ctx.config.bootstrap;
  o.rho_lo = ctx.config.rho_lo;
  o.rho_hi = ctx.config.rho_hi;
  o.seed = ctx.config.seed;
  o.parallelism = ctx.options.parallelism;
  const auto rows = gap_relaxation(ctx.potential, ctx.config.gap_L, *ctx.config.energy, o);
  auto f = ctx.open("gap.csv");
  CsvWriter w(f, {"L", "energy", "tau_hat", "stderr", "fit_lo", "fit_hi", "log_residual_rms"});
  auto g = ctx.open("gap_relaxation.csv");
  CsvWriter wr(g, {"L", "t", "rho"});
  for (const auto& r : rows) {
    w << static_cast<long long>(r.L) << r.energy << r.tau_hat << r.std_error << r.fit_lo << r.fit_hi
      << r.log_residual_rms;
    w.end_row();
    for (std::size_t k = 0; k < r.times.size(); ++k) {
      wr << static_cast<long long>(r.L) << r.times[k] << r.rho[k];
      wr.end_row();
    }
    ctx.say("L = " + std::to_string(r.L) + ": tau = " + fmt(r.tau_hat) + " +- " + fmt(r.std_error));
  }
  for (std::size_t a = 0; a < rows.size(); ++a)
    for (std::size_t b = 0; b < rows.size(); ++b)
      if (rows[b].L == 2 * rows[a].L && rows[a].L >= 4) {
        const double ratio = rows[b].tau_hat / rows[a].tau_hat;
        ctx.say("tau(" + std::to_string(rows[b].L) + ") / tau(" + std::to_string(rows[a].L) + ") = " + fmt(ratio));
        ctx.check(ratio >= 3.0 && ratio <= 5.0, "relaxation time ratio " + fmt(ratio) + " outside [3, 5]");
      }
  write_plot(ctx, "gap",
             "set logscale y\nset xlabel 't'\nset ylabel 'profile amplitude'\n"
             "plot for [L in \"8 16 32\"] 'gap_relaxation.csv' using 2:($1 == L ? $3 : 1/0) with lines title 'L = '.L");
}

/// The rational whose decimal expansion is the shortest round-trip form of v.
symbolic::Rational exact_decimal(double v) {
  std::string s = fmt(v);
  int exp10 = 0;
  if (const auto e = s.find_first_of("eE"); e != std::string::npos) {
    exp10 = std::stoi(s.substr(e + 1));
    s.erase(e);
  }
  if (const auto dot = s.find('.'); dot != std::string::npos) {
    exp10 -= static_cast<int>(s.size() - dot - 1);
    s.erase(dot, 1);
  }
  boost::multiprecision::cpp_int num(s);
  boost::multiprecision::cpp_int den = 1;
  for (int k = 0; k < std::abs(exp10); ++k) (exp10 < 0 ? den : num) *= 10;
  return symbolic::Rational(num, den);
}

void run_check_fd(Context& ctx) {
  const symbolic::Rational gamma = exact_decimal(*ctx.config.gamma);
  const symbolic::ExactPolynomial r = symbolic::check_fd_identity(gamma);
  auto f = ctx.open("fd_residual.txt");
  f << "gamma = " << gamma.str() << "\n"
    << "residual = " << r.str() << "\n";
  if (r.is_zero()) ctx.say("residual = 0 (exact)");
  else ctx.say("residual = " + r.str());
  ctx.check(r.is_zero(), "fluctuation-dissipation residual is not zero");
}

void run_invariance(Context& ctx) {
  const SimParams sim = make_sim(ctx);
  const double horizon = *ctx.config.t_macro * ctx.n2();
  const std::size_t steps = whole_steps(horizon, sim.dt_micro, "horizon");
  ctx.fact("t_macro", *ctx.config.t_macro);
  ctx.fact("t_micro", horizon);
  const ThermoSummary t = thermo(ctx.potential, sim.beta);
  const double mean_W = 0.5 * sim.gamma * (t.mean_d2V / sim.beta - t.mean_dV2);
  struct Moments {
    std::array<double, 4> start{}, end{};
  };
  auto moments = [&](const ChainState& s) {
    const auto cur = currents(s, ctx.potential, sim.gamma);
    std::array<double, 4> m{};
    const double n = static_cast<double>(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
      m[0] += s.p[i] * s.p[i] / n;
      m[1] += ctx.potential.dV(s.r[i]) * s.r[i] / n;
      m[2] += (0.5 * s.p[i] * s.p[i] + ctx.potential.V(s.r[i])) / n;
      m[3] += (cur.WA[i] + cur.WS[i]) / n;
    }
    return m;
  };
  auto work = [&](std::size_t m) {
    RngStream rng(sim.seed, m);
    ChainState s = sample_gibbs(ctx.potential, sim.beta, sim.N, rng);
    Moments out;
    out.start = moments(s);
    Integrator integrator(sim);
    integrator.advance(s, rng, steps);
    out.end = moments(s);
    return out;
  };
  std::array<double, 4> s0{}, s0sq{}, s1{}, s1sq{};
  replicate(ctx.config.replicas, ctx.options.parallelism, work, [&](std::size_t, Moments&& m) {
    for (int k = 0; k < 4; ++k) {
      s0[k] += m.start[k];
      s0sq[k] += m.start[k] * m.start[k];
      s1[k] += m.end[k];
      s1sq[k] += m.end[k] * m.end[k];
    }
  });
  const double M = static_cast<double>(ctx.config.replicas);
  const std::array<std::string, 4> names = {"p^2", "V'(r) r", "energy", "W"};
  const std::array<double, 4> expected = {1.0 / sim.beta, 1.0 / sim.beta, t.mean_energy, mean_W};
  auto f = ctx.open("invariance.csv");
  CsvWriter w(f, {"observable", "expected", "initial_mean", "initial_stderr", "final_mean", "final_stderr", "final_z"});
  for (int k = 0; k < 4; ++k) {
    auto se = [&](double s, double sq) {
      return M > 1 ? std::sqrt(std::max(0.0, (sq / M - (s / M) * (s / M)) / (M - 1.0))) : 0.0;
    };
    const double m0 = s0[k] / M, e0 = se(s0[k], s0sq[k]);
    const double m1 = s1[k] / M, e1 = se(s1[k], s1sq[k]);
    const double z = e1 > 0.0 ? (m1 - expected[static_cast<std::size_t>(k)]) / e1 : 0.0;
    w << names[static_cast<std::size_t>(k)] << expected[static_cast<std::size_t>(k)] << m0 << e0 << m1 << e1 << z;
    w.end_row();
    if (M > 1) ctx.check(std::abs(z) <= 4.0, "<" + names[static_cast<std::size_t>(k)] + "> moved by " + fmt(z) + " stderr");
    ctx.say("<" + names[static_cast<std::size_t>(k)] + ">: " + fmt(m0) + " -> " + fmt(m1) + " (expected " +
            fmt(expected[static_cast<std::size_t>(k)]) + ", z = " + fmt(z) + ")");
  }
}

void write_manifest(const fs::path& dir, const RunConfig& config, const RunOptions& options,
                    const std::string& status, const RunOutcome& outcome,
                    const std::vector<std::pair<std::string, std::string>>& facts, double wall, const std::string& error) {
  std::ofstream m(dir / "manifest.txt");
  m << "status = " << status << "\n"
    << "experiment = " << to_string(config.experiment) << "\n"
    << "chainlab_version = " << library_version() << "\n"
    << "compiler = " << compiler_text() << "\n"
    << "eigen_version = " << EIGEN_WORLD_VERSION << "." << EIGEN_MAJOR_VERSION << "." << EIGEN_MINOR_VERSION << "\n"
    << "boost_version = " << BOOST_VERSION / 100000 << "." << BOOST_VERSION / 100 % 1000 << "." << BOOST_VERSION % 100
    << "\n"
    << "seed = " << config.seed << "\n"
    << "parallelism = " << options.parallelism << "\n"
    << "strict = " << (options.strict ? "true" : "false") << "\n"
    << "wall_seconds = " << format_double(wall) << "\n";
  for (const auto& [k, v] : facts) m << k << " = " << v << "\n";
  if (!error.empty()) m << "error = " << error << "\n";
  for (const auto& f : outcome.files) m << "file = " << f << "\n";
  for (const auto& f : outcome.failures) m << "failed_check = " << f << "\n";
  for (const auto& s : outcome.summary) m << "summary = " << s << "\n";
  m << "\n[config]\n" << serialize_config(config);
}

}  // namespace

RunOutcome run(const RunConfig& original, const RunOptions& options) {
  RunConfig config = original;
  if (options.seed_override) config.seed = *options.seed_override;
  if (options.out_dir) config.output = *options.out_dir;
  RunOutcome outcome;
  outcome.output_dir = config.output;
  try {
    validate_config(config);
  } catch (const ConfigError& e) {
    outcome.exit_code = kExitConfig;
    outcome.failures.push_back(e.what());
    if (options.log) *options.log << e.what() << '\n';
    return outcome;
  }

  const fs::path dir(config.output);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) {
    outcome.exit_code = kExitFailure;
    outcome.failures.push_back("cannot create output directory " + dir.string() + ": " + ec.message());
    return outcome;
  }
  const auto start = std::chrono::steady_clock::now();
  auto elapsed = [&] { return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count(); };
  write_manifest(dir, config, options, "incomplete", outcome, {}, 0.0, "");

  std::vector<std::pair<std::string, std::string>> facts;
  try {
    Context ctx{config, options, dir, outcome, make_potential(config.potential), {}};
    if (!ctx.potential.supported()) ctx.say("warning: potential violates the standing assumptions; no guarantees");
    if (!ctx.potential.satisfies_iii()) ctx.say("note: convexity ratio below the spectral-gap threshold (advisory)");
    switch (config.experiment) {
      case Experiment::thermo: run_thermo(ctx); break;
      case Experiment::sample: run_sample(ctx); break;
      case Experiment::evolve: run_evolve(ctx); break;
      case Experiment::correlate: run_correlate(ctx); break;
      case Experiment::green_kubo: run_green_kubo(ctx); break;
      case Experiment::modes: run_modes(ctx); break;
      case Experiment::bounds: run_bounds(ctx); break;
      case Experiment::saddle: run_saddle(ctx); break;
      case Experiment::gap: run_gap(ctx); break;
      case Experiment::check_fd: run_check_fd(ctx); break;
      case Experiment::invariance: run_invariance(ctx); break;
    }
    facts = ctx.facts;
  } catch (const std::exception& e) {
    for (const auto& f : outcome.files) fs::remove(dir / f, ec);
    outcome.files.clear();
    outcome.exit_code = kExitFailure;
    outcome.failures.push_back(e.what());
    if (options.log) *options.log << "error: " << e.what() << '\n';
    write_manifest(dir, config, options, "failed", outcome, facts, elapsed(), e.what());
    return outcome;
  }
  if (options.strict && !outcome.failures.empty()) outcome.exit_code = kExitFailure;
  for (const auto& f : outcome.failures)
    if (options.log) *options.log << (options.strict ? "FAILED: " : "warning: ") << f << '\n';
  write_manifest(dir, config, options, "complete", outcome, facts, elapsed(), "");
  return outcome;
}

}  // namespace chainlab

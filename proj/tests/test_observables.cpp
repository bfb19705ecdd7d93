#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "chainlab/ensemble.hpp"
#include "chainlab/error.hpp"
#include "chainlab/gibbs.hpp"
#include "chainlab/observables.hpp"

using namespace chainlab;

namespace {

Potential harmonic() { return make_potential({}); }

Potential log_cosh(double eps) {
  PotentialSpec s;
  s.family = "log-cosh";
  s.epsilon = eps;
  return make_potential(s);
}

struct MeanSe {
  double mean = 0, se = 0;
};

MeanSe mean_se(const std::vector<double>& x) {
  double m = 0;
  for (double v : x) m += v;
  m /= double(x.size());
  double ss = 0;
  for (double v : x) ss += (v - m) * (v - m);
  return {m, std::sqrt(ss / double(x.size() - 1) / double(x.size()))};
}

EnsembleSpec small_ensemble(std::size_t replicas) {
  EnsembleSpec e;
  e.sim.N = 16;
  e.sim.seed = 77;
  e.replicas = replicas;
  e.horizon_micro = 20.0;
  e.snapshot_micro = 0.5;
  e.max_lag_micro = 10.0;
  e.modes = {1, 2};
  e.bootstrap = 200;
  return e;
}

}  // namespace

TEST(SiteEnergies, Examples) {
  ChainState zero(5);
  for (double e : site_energies(zero, harmonic())) EXPECT_EQ(e, 0.0);
  ChainState ones(4);
  ones.p.assign(4, 1.0);
  ones.r.assign(4, 1.0);
  for (double e : site_energies(ones, harmonic())) EXPECT_EQ(e, 1.0);
}

TEST(SiteEnergies, SumIsTotalEnergy) {
  RngStream rng(1, 0);
  const Potential v = log_cosh(0.5);
  const ChainState s = sample_gibbs(v, 1.0, 100, rng);
  double total = 0, direct = 0;
  for (double e : site_energies(s, v)) {
    EXPECT_GE(e, 0.0);
    total += e;
  }
  for (std::size_t i = 0; i < s.size(); ++i) direct += 0.5 * s.p[i] * s.p[i] + v.V(s.r[i]);
  EXPECT_NEAR(total, direct, 1e-12 * direct);
}

TEST(Currents, DirectSubstitution) {
  ChainState s(3);
  s.p[0] = 1.0;
  s.r[1] = 2.0;
  const CurrentSample w = currents(s, harmonic(), 1.0);
  EXPECT_EQ(w.WA[0], -2.0);
  EXPECT_EQ(w.WS[0], -1.5);
  EXPECT_EQ(w.sigma[0], 2.0);
}

TEST(Currents, BondWrapsAroundRing) {
  ChainState s(3);
  s.p[2] = 3.0;
  s.r[0] = 0.5;
  const CurrentSample w = currents(s, harmonic(), 4.0);
  EXPECT_EQ(w.WA[2], -1.5);
  EXPECT_EQ(w.sigma[2], 2.0 * 1.5);
}

TEST(Currents, ZeroGammaHasNoNoisePart) {
  RngStream rng(2, 0);
  const ChainState s = sample_gibbs(log_cosh(0.5), 1.0, 10, rng);
  const CurrentSample w = currents(s, log_cosh(0.5), 0.0);
  for (std::size_t i = 0; i < 10; ++i) {
    EXPECT_EQ(w.WS[i], 0.0);
    EXPECT_EQ(w.sigma[i], 0.0);
  }
}

TEST(Currents, EquilibriumMeans) {
  const double gamma = 1.5, beta = 1.3;
  for (const Potential& v : {harmonic(), log_cosh(0.5)}) {
    RngStream rng(3, 0);
    const ChainState s = sample_gibbs(v, beta, 400000, rng);
    const CurrentSample w = currents(s, v, gamma);
    const ThermoSummary t = thermo(v, beta);
    const MeanSe wa = mean_se(w.WA), ws = mean_se(w.WS);
    EXPECT_NEAR(wa.mean, 0.0, 4.0 * wa.se);
    const double expected = 0.5 * gamma * (t.mean_d2V / beta - t.mean_dV2);
    EXPECT_NEAR(expected, 0.0, 1e-10);
    EXPECT_NEAR(ws.mean, expected, 4.0 * ws.se);
  }
}

TEST(TestFunction, Construction) {
  const TestFunction c = TestFunction::cosine_mode(1, 4);
  EXPECT_NEAR(c.values[0], 1.0, 1e-15);
  EXPECT_NEAR(c.values[1], 0.0, 1e-15);
  EXPECT_NEAR(c.values[2], -1.0, 1e-15);
  EXPECT_NEAR(TestFunction::sine_mode(2, 64).mean_square(), 0.5, 1e-14);
  EXPECT_EQ(TestFunction::constant(9).mean_square(), 1.0);
}

TEST(FluctuationField, Examples) {
  const Potential v = harmonic();
  const ThermoSummary t = thermo(v, 1.0);
  ChainState s(16);
  s.p.assign(16, std::sqrt(2.0));
  EXPECT_NEAR(fluctuation_field(s, v, TestFunction::cosine_mode(1, 16), t), 0.0, 1e-12);
  RngStream rng(4, 0);
  const ChainState g = sample_gibbs(v, 1.0, 16, rng);
  double h = 0;
  for (double e : site_energies(g, v)) h += e;
  EXPECT_NEAR(fluctuation_field(g, v, TestFunction::constant(16), t), (h - 16 * t.mean_energy) / 4.0,
              1e-12);
}

TEST(FluctuationField, StaticVarianceAtN256) {
  const Potential v = harmonic();
  const ThermoSummary t = thermo(v, 1.0);
  const std::size_t n = 256;
  const int replicas = 10000;
  const std::vector<TestFunction> fns = {TestFunction::cosine_mode(1, n), TestFunction::cosine_mode(2, n),
                                         TestFunction::constant(n)};
  std::vector<std::vector<double>> squares(fns.size());
  for (int m = 0; m < replicas; ++m) {
    RngStream rng(5, static_cast<std::uint64_t>(m));
    const std::vector<double> e = site_energies(sample_gibbs(v, 1.0, n, rng), v);
    for (std::size_t k = 0; k < fns.size(); ++k) {
      const double y = fluctuation_field(e, fns[k], t.mean_energy);
      squares[k].push_back(y * y);
    }
  }
  for (std::size_t k = 0; k < fns.size(); ++k) {
    const MeanSe est = mean_se(squares[k]);
    EXPECT_NEAR(est.mean, t.chi * fns[k].mean_square(), 4.0 * est.se) << fns[k].name;
  }
}

TEST(AnalyzeTrajectory, MatchesDirectSums) {
  RngStream rng(6, 0);
  const std::size_t n = 6, snaps = 9;
  std::vector<std::vector<double>> e(snaps, std::vector<double>(n));
  for (auto& row : e)
    for (double& x : row) x = rng.uniform() * 3;
  CorrelationSpec spec;
  spec.N = n;
  spec.max_lag = 4;
  spec.origin_stride = 2;
  spec.modes = {1};
  spec.mode_max_lag = 3;
  spec.mean_energy = 1.2;
  const ReplicaStats stats = analyze_trajectory(spec, e);
  for (std::size_t lag = 0; lag <= 4; ++lag) {
    for (std::size_t i = 0; i < n; ++i) {
      double sum = 0;
      int count = 0;
      for (std::size_t t0 = 0; t0 + lag < snaps; t0 += 2, ++count)
        for (std::size_t j = 0; j < n; ++j) sum += (e[t0 + lag][(i + j) % n] - 1.2) * (e[t0][j] - 1.2);
      EXPECT_NEAR(stats.corr(long(lag), long(i)), sum / (n * count), 1e-12);
    }
  }
  auto mode_component = [&](std::size_t s, bool cosine) {
    double y = 0;
    for (std::size_t j = 0; j < n; ++j) {
      const double phase = 2 * std::numbers::pi * double(j) / double(n);
      y += (cosine ? std::cos(phase) : std::sin(phase)) * (e[s][j] - 1.2);
    }
    return y / std::sqrt(double(n));
  };
  for (std::size_t lag = 0; lag <= 3; ++lag) {
    double num = 0, den = 0;
    for (std::size_t t0 = 0; t0 + lag < snaps; ++t0) {
      num += mode_component(t0, true) * mode_component(t0 + lag, true) +
             mode_component(t0, false) * mode_component(t0 + lag, false);
      den += std::pow(mode_component(t0, true), 2) + std::pow(mode_component(t0, false), 2);
    }
    EXPECT_NEAR(stats.modes[0].num(long(lag)), num, 1e-12);
    EXPECT_NEAR(stats.modes[0].den(long(lag)), den, 1e-12);
  }
}

TEST(AnalyzeTrajectory, RejectsShortRecords) {
  CorrelationSpec spec;
  spec.N = 4;
  spec.max_lag = 5;
  std::vector<std::vector<double>> e(3, std::vector<double>(4, 1.0));
  EXPECT_THROW(analyze_trajectory(spec, e), Error);
}

TEST(Correlation, WrappedLagLayout) {
  const EnsembleResult r = run_equilibrium_ensemble(small_ensemble(4));
  const CorrelationEstimate& c = r.correlation;
  ASSERT_EQ(c.lags.size(), 16u);
  EXPECT_EQ(c.lags.front(), -7);
  EXPECT_EQ(c.lags.back(), 8);
  EXPECT_EQ(c.lags[c.column(0)], 0);
  EXPECT_EQ(c.lags[c.column(-3)], -3);
  EXPECT_EQ(c.lags[c.column(13)], -3);
  EXPECT_EQ(c.times.size(), 21u);
  EXPECT_DOUBLE_EQ(c.times.back(), 10.0);
}

TEST(Correlation, EquilibriumInvariants) {
  const EnsembleResult r = run_equilibrium_ensemble(small_ensemble(400));
  const CorrelationEstimate& c = r.correlation;
  const auto rows = c.C.rows();
  for (std::size_t k = 0; k < c.lags.size(); ++k) {
    const double expected = c.lags[k] == 0 ? r.thermo.chi : 0.0;
    EXPECT_NEAR(c.C(0, long(k)), expected, 4.0 * c.std_error(0, long(k))) << "lag " << c.lags[k];
  }
  // Total-energy conservation: sum_i C(i, t) against t = 0, replica by replica in the bootstrap.
  for (long t = 1; t < rows; ++t) {
    std::vector<double> diffs;
    for (const auto& b : c.resamples) diffs.push_back(b.row(t).sum() - b.row(0).sum());
    double mean = 0, ss = 0;
    for (double d : diffs) mean += d;
    mean /= double(diffs.size());
    for (double d : diffs) ss += (d - mean) * (d - mean);
    const double se = std::sqrt(ss / double(diffs.size() - 1));
    EXPECT_NEAR(c.C.row(t).sum() - c.C.row(0).sum(), 0.0, 4.0 * se + 1e-12) << "row " << t;
  }
  for (long t = 0; t < rows; t += 5) {
    for (int lag = 1; lag < 8; ++lag) {
      const auto a = long(c.column(lag)), b = long(c.column(-lag));
      const double se = std::hypot(c.std_error(t, a), c.std_error(t, b));
      EXPECT_NEAR(c.C(t, a), c.C(t, b), 4.0 * se);
    }
  }
  for (const ModeCorrelation& m : r.modes) {
    EXPECT_NEAR(m.rho(0), 1.0, 1e-12);
    EXPECT_NEAR(m.var_cos, r.thermo.chi / 2, 4 * m.var_cos_se);
    EXPECT_NEAR(m.var_sin, r.thermo.chi / 2, 4 * m.var_sin_se);
  }
}

TEST(Correlation, NeedsTwoReplicas) {
  EXPECT_THROW(run_equilibrium_ensemble(small_ensemble(1)), Error);
  CorrelationSpec spec;
  spec.N = 4;
  CorrelationAccumulator acc(spec);
  EXPECT_THROW(acc.correlation(), Error);
}

TEST(Correlation, IndependentOfParallelism) {
  EnsembleSpec e = small_ensemble(13);
  const EnsembleResult a = run_equilibrium_ensemble(e);
  e.parallelism = 8;
  const EnsembleResult b = run_equilibrium_ensemble(e);
  EXPECT_EQ(a.correlation.C, b.correlation.C);
  EXPECT_EQ(a.correlation.std_error, b.correlation.std_error);
  EXPECT_EQ(a.modes[1].rho, b.modes[1].rho);
}

TEST(Replicate, SingleReplicaPassesThrough) {
  std::vector<std::size_t> seen;
  replicate(1, 8, [](std::size_t m) { return m + 10; },
            [&](std::size_t m, std::size_t v) { seen.push_back(m * 100 + v); });
  ASSERT_EQ(seen.size(), 1u);
  EXPECT_EQ(seen[0], 10u);
}

TEST(Replicate, MergesInOrderAndPropagatesFailure) {
  std::vector<std::size_t> order;
  replicate(50, 3, [](std::size_t m) { return m; }, [&](std::size_t, std::size_t v) { order.push_back(v); });
  for (std::size_t k = 0; k < 50; ++k) EXPECT_EQ(order[k], k);
  EXPECT_THROW(replicate(
                   50, 3,
                   [](std::size_t m) {
                     if (m == 17) throw Error("boom");
                     return m;
                   },
                   [](std::size_t, std::size_t) {}),
               Error);
}

TEST(Poisson, MeanAndVarianceOne) {
  RngStream rng(7, 0);
  std::vector<double> x;
  for (int k = 0; k < 200000; ++k) x.push_back(poisson_one(rng));
  const MeanSe est = mean_se(x);
  EXPECT_NEAR(est.mean, 1.0, 4 * est.se);
  double var = 0;
  for (double v : x) var += (v - est.mean) * (v - est.mean);
  var /= double(x.size() - 1);
  EXPECT_NEAR(var, 1.0, 0.02);
}

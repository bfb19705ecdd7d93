#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <sstream>
#include <vector>

#include "chainlab/chain_state.hpp"
#include "chainlab/dynamics.hpp"
#include "chainlab/error.hpp"
#include "chainlab/gibbs.hpp"
#include "chainlab/potential.hpp"

using namespace chainlab;

namespace {

constexpr double kKs1Percent = 1.628;  // asymptotic Kolmogorov quantile at level 0.01

Potential harmonic() { return make_potential({}); }

Potential log_cosh(double eps) {
  PotentialSpec s;
  s.family = "log-cosh";
  s.epsilon = eps;
  return make_potential(s);
}

double site_energy(const ChainState& s, std::size_t i, const Potential& v) {
  return 0.5 * s.p[i] * s.p[i] + v.V(s.r[i]);
}

double sum_energy(const ChainState& s, const Potential& v) {
  double h = 0;
  for (std::size_t i = 0; i < s.size(); ++i) h += site_energy(s, i, v);
  return h;
}

double two_sample_ks(std::vector<double> a, std::vector<double> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  std::size_t i = 0, j = 0;
  double d = 0;
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= x) ++i;
    while (j < b.size() && b[j] <= x) ++j;
    d = std::max(d, std::abs(double(i) / a.size() - double(j) / b.size()));
  }
  return d;
}

}  // namespace

TEST(SampleGibbs, HarmonicMomentumVariance) {
  RngStream rng(1, 0);
  const std::size_t n = 100000;
  const ChainState s = sample_gibbs(harmonic(), 1.0, n, rng);
  double m = 0;
  for (double p : s.p) m += p * p;
  m /= n;
  EXPECT_NEAR(m, 1.0, 4.0 * std::sqrt(2.0 / n));
}

TEST(SampleGibbs, HarmonicMeanEnergy) {
  RngStream rng(2, 0);
  const std::size_t n = 100000;
  const Potential v = harmonic();
  const ChainState s = sample_gibbs(v, 2.0, n, rng);
  std::vector<double> e(n);
  double mean = 0;
  for (std::size_t i = 0; i < n; ++i) mean += (e[i] = site_energy(s, i, v));
  mean /= n;
  double var = 0;
  for (double x : e) var += (x - mean) * (x - mean);
  var /= n - 1;
  EXPECT_NEAR(mean, 0.5, 4.0 * std::sqrt(var / n));
}

TEST(SampleGibbs, Deterministic) {
  RngStream a(9, 4), b(9, 4);
  EXPECT_EQ(sample_gibbs(log_cosh(0.2), 1.0, 64, a), sample_gibbs(log_cosh(0.2), 1.0, 64, b));
  RngStream c(9, 4, 100), d(9, 4, 100);
  EXPECT_EQ(sample_gibbs(harmonic(), 1.0, 8, c), sample_gibbs(harmonic(), 1.0, 8, d));
}

TEST(SampleGibbs, RejectionSamplerMatchesQuadrature) {
  const Potential v = log_cosh(0.5);
  const double beta = 1.0;
  RngStream rng(3, 0);
  const int n = 1000000;
  double m = 0, m2 = 0;
  for (int k = 0; k < n; ++k) {
    const double r = sample_stretch(v, beta, rng);
    m += r * r;
    m2 += r * r * r * r;
  }
  m /= n;
  m2 /= n;
  const double se = std::sqrt((m2 - m * m) / n);
  EXPECT_NEAR(m, thermo(v, beta).mean_r2, 4.0 * se);
}

TEST(SetSiteEnergy, HitsTargetAndKeepsSigns) {
  const Potential v = log_cosh(0.5);
  double p = -0.7, r = 1.3;
  set_site_energy(p, r, v, 3.0);
  EXPECT_NEAR(0.5 * p * p + v.V(r), 3.0, 1e-13);
  EXPECT_LT(p, 0);
  EXPECT_GT(r, 0);
  double p0 = 0, r0 = 0;
  set_site_energy(p0, r0, v, 2.0);
  EXPECT_NEAR(0.5 * p0 * p0, 2.0, 1e-15);
}

TEST(SetSiteEnergy, KeepsPolarAngle) {
  const Potential v = log_cosh(0.5);
  double p = 0.4, r = -0.9;
  const double angle = std::atan2(std::copysign(std::sqrt(v.V(r)), r), p / std::sqrt(2.0));
  set_site_energy(p, r, v, 5.0);
  EXPECT_NEAR(std::atan2(std::copysign(std::sqrt(v.V(r)), r), p / std::sqrt(2.0)), angle, 1e-13);
}

TEST(Microcanonical, ProjectionHitsSurface) {
  for (const Potential& v : {harmonic(), log_cosh(0.015), log_cosh(0.5)}) {
    RngStream rng(4, 0);
    ChainState s = sample_gibbs(v, 1.0, 50, rng);
    rescale_total_energy(s, v, 50 * 1.3);
    EXPECT_NEAR(sum_energy(s, v), 65.0, 1e-9 * 65.0);
  }
}

TEST(Microcanonical, ProjectionIsIdempotent) {
  const Potential v = log_cosh(0.5);
  RngStream rng(5, 0);
  ChainState s = sample_gibbs(v, 1.0, 40, rng);
  rescale_total_energy(s, v, 40.0);
  const ChainState once = s;
  rescale_total_energy(s, v, 40.0);
  for (std::size_t i = 0; i < s.size(); ++i) {
    EXPECT_NEAR(s.p[i], once.p[i], 1e-14 * (1 + std::abs(once.p[i])));
    EXPECT_NEAR(s.r[i], once.r[i], 1e-14 * (1 + std::abs(once.r[i])));
  }
}

TEST(Microcanonical, SamplerStaysOnSurface) {
  for (const Potential& v : {harmonic(), log_cosh(0.015)}) {
    RngStream rng(6, 0);
    const ChainState s = sample_microcanonical(v, 32, 0.8, rng, 50);
    EXPECT_NEAR(sum_energy(s, v), 32 * 0.8, 1e-9 * 32 * 0.8);
  }
}

TEST(Microcanonical, RejectsNonpositiveEnergy) {
  RngStream rng(7, 0);
  EXPECT_THROW(sample_microcanonical(harmonic(), 8, 0.0, rng, 1), Error);
}

// At N = 4 the noise-mixed sampler is compared with brute-force conditioning of
// Gibbs draws on a thin shell around the target energy.
TEST(Microcanonical, MatchesBruteForceShellAtN4) {
  const Potential v = harmonic();
  const std::size_t n = 4;
  const double energy = 1.0;
  const int samples = 2000;
  std::vector<double> mixed, brute;
  for (int m = 0; m < samples; ++m) {
    RngStream rng(8, static_cast<std::uint64_t>(m));
    const ChainState s = sample_microcanonical(v, n, energy, rng, 1000);
    mixed.push_back(site_energy(s, 0, v));
  }
  RngStream rng(9, 0);
  while (brute.size() < static_cast<std::size_t>(samples)) {
    const ChainState s = sample_gibbs(v, 1.0, n, rng);
    if (std::abs(sum_energy(s, v) - n * energy) < 0.01 * n * energy) brute.push_back(site_energy(s, 0, v));
  }
  const double d = two_sample_ks(mixed, brute);
  EXPECT_LT(d * std::sqrt(samples / 2.0), kKs1Percent);
}

// For the harmonic chain the surface measure makes E_0 / (N E) a Beta(1, N - 1) variable.
TEST(Microcanonical, SingleSiteMarginalAtN32) {
  const Potential v = harmonic();
  const std::size_t n = 32;
  const double energy = 1.0;
  const int samples = 2000;
  std::vector<double> x;
  for (int m = 0; m < samples; ++m) {
    RngStream rng(10, static_cast<std::uint64_t>(m));
    const ChainState s = sample_microcanonical(v, n, energy, rng, 1000);
    x.push_back(site_energy(s, 0, v) / (n * energy));
  }
  std::sort(x.begin(), x.end());
  double d = 0;
  for (int k = 0; k < samples; ++k) {
    const double cdf = 1.0 - std::pow(1.0 - x[k], double(n - 1));
    d = std::max({d, std::abs(cdf - double(k) / samples), std::abs(cdf - double(k + 1) / samples)});
  }
  EXPECT_LT(d * std::sqrt(double(samples)), kKs1Percent);
}

TEST(Snapshot, CsvRoundTrip) {
  RngStream rng(11, 0);
  const ChainState s = sample_gibbs(log_cosh(0.5), 0.7, 17, rng);
  std::stringstream buf;
  write_snapshot_csv(buf, s);
  EXPECT_EQ(read_snapshot_csv(buf), s);
}

TEST(Snapshot, BinaryRoundTrip) {
  RngStream rng(12, 0);
  const ChainState s = sample_gibbs(harmonic(), 1.0, 9, rng);
  std::stringstream buf;
  write_snapshot_binary(buf, s);
  EXPECT_EQ(buf.str().size(), 8u + 2 * 9 * 8);
  EXPECT_EQ(read_snapshot_binary(buf), s);
}

TEST(Snapshot, MalformedCsvRejected) {
  std::stringstream buf("3\n1,2\n1,2,3\n");
  EXPECT_THROW(read_snapshot_csv(buf), Error);
}

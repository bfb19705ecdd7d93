#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "chainlab/error.hpp"
#include "chainlab/estimators.hpp"
#include "chainlab/potential.hpp"

using namespace chainlab;

namespace {

Potential harmonic() { return make_potential({}); }

Potential log_cosh(double eps) {
  PotentialSpec s;
  s.family = "log-cosh";
  s.epsilon = eps;
  return make_potential(s);
}

// chi times a normalized discrete Gaussian of variance offset + 2 D t on wrapped lags,
// with a few resamples that scale the spread by small factors.
CorrelationEstimate gaussian_correlation(std::size_t N, double D, double offset, double chi,
                                         std::size_t rows, double dt) {
  CorrelationEstimate c;
  c.N = N;
  c.replicas = 100;
  for (int i = -static_cast<int>(N / 2) + 1; i <= static_cast<int>(N / 2); ++i) c.lags.push_back(i);
  auto fill = [&](double d) {
    Eigen::MatrixXd m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(c.lags.size()));
    for (std::size_t k = 0; k < rows; ++k) {
      const double var = offset + 2 * d * dt * static_cast<double>(k);
      if (var == 0.0) {
        m.row(static_cast<Eigen::Index>(k)).setZero();
        m(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(N / 2 - 1)) = chi;
        continue;
      }
      double norm = 0;
      for (std::size_t j = 0; j < c.lags.size(); ++j) norm += std::exp(-0.5 * c.lags[j] * c.lags[j] / var);
      for (std::size_t j = 0; j < c.lags.size(); ++j)
        m(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(j)) =
            chi * std::exp(-0.5 * c.lags[j] * c.lags[j] / var) / norm;
    }
    return m;
  };
  for (std::size_t k = 0; k < rows; ++k) c.times.push_back(dt * static_cast<double>(k));
  c.C = fill(D);
  c.std_error = Eigen::MatrixXd::Zero(c.C.rows(), c.C.cols());
  for (double f : {0.97, 0.99, 1.01, 1.03}) c.resamples.push_back(fill(D * f));
  return c;
}

ModeCorrelation exponential_mode(int n, double D, std::size_t rows, double dt_macro) {
  ModeCorrelation m;
  m.mode = n;
  m.rho.resize(static_cast<Eigen::Index>(rows));
  m.rho_resamples.resize(3, static_cast<Eigen::Index>(rows));
  const double k2 = std::pow(2 * std::numbers::pi * n, 2);
  for (std::size_t k = 0; k < rows; ++k) {
    const double t = dt_macro * static_cast<double>(k);
    m.times_macro.push_back(t);
    m.times_micro.push_back(t * 64 * 64);
    m.rho(static_cast<Eigen::Index>(k)) = std::exp(-D * k2 * t);
    for (Eigen::Index b = 0; b < 3; ++b)
      m.rho_resamples(b, static_cast<Eigen::Index>(k)) = std::exp(-D * (0.98 + 0.02 * b) * k2 * t);
  }
  return m;
}

}  // namespace

TEST(SecondMoment, WeightsBySquaredLag) {
  Eigen::MatrixXd c(2, 3);
  c << 1, 2, 3, 0, 1, 0;
  const Eigen::VectorXd m = second_moment(c, {-1, 0, 2});
  EXPECT_DOUBLE_EQ(m(0), 1 + 12);
  EXPECT_DOUBLE_EQ(m(1), 0);
}

TEST(GreenKubo, RecoversSyntheticDiffusivity) {
  ThermoSummary t = thermo(harmonic(), 1.0);
  t.chi = 1.7;
  const CorrelationEstimate c = gaussian_correlation(256, 0.4, 1.5, t.chi, 41, 5.0);
  const DiffusivityEstimate e = green_kubo_diffusivity(c, t);
  EXPECT_EQ(e.method, EstimateMethod::green_kubo_slope);
  EXPECT_NEAR(e.D_hat, 0.4, 1e-8);
  EXPECT_NEAR(e.diagnostics.at("intercept"), 1.5 * t.chi, 1e-6);
  EXPECT_DOUBLE_EQ(e.window_lo, 50.0);
  EXPECT_DOUBLE_EQ(e.window_hi, 200.0);
  EXPECT_GT(e.std_error, 0.4 * 0.01);
  EXPECT_LT(e.std_error, 0.4 * 0.05);
}

TEST(GreenKubo, CustomWindow) {
  const ThermoSummary t = thermo(harmonic(), 1.0);
  const CorrelationEstimate c = gaussian_correlation(256, 0.3, 1.0, 1.0, 41, 5.0);
  GreenKuboOptions o;
  o.window_lo_fraction = 0.5;
  o.window_hi_fraction = 0.75;
  const DiffusivityEstimate e = green_kubo_diffusivity(c, t, o);
  EXPECT_NEAR(e.D_hat, 0.3, 1e-8);
  EXPECT_DOUBLE_EQ(e.window_lo, 100.0);
  EXPECT_DOUBLE_EQ(e.window_hi, 150.0);
}

// Mass split between lag 0 and lags +-l so that m(t) = 2 D t + 1 exactly; at N = 32 the
// implied spread sqrt(2 D t) passes N / 4 well before t = 200.
TEST(GreenKubo, SpreadGuard) {
  const ThermoSummary t = thermo(harmonic(), 1.0);
  CorrelationEstimate c = gaussian_correlation(32, 0.4, 1.0, 1.0, 41, 5.0);
  const int l = 15;
  auto fill = [&](double d, Eigen::MatrixXd& m) {
    m.setZero();
    for (Eigen::Index k = 0; k < m.rows(); ++k) {
      const double w = (2 * d * c.times[static_cast<std::size_t>(k)] + 1) / (l * l);
      m(k, static_cast<Eigen::Index>(c.column(0))) = 1 - w;
      m(k, static_cast<Eigen::Index>(c.column(l))) = w / 2;
      m(k, static_cast<Eigen::Index>(c.column(-l))) = w / 2;
    }
  };
  fill(0.4, c.C);
  for (std::size_t b = 0; b < c.resamples.size(); ++b) fill(0.4 * (0.98 + 0.01 * b), c.resamples[b]);
  EXPECT_THROW(green_kubo_diffusivity(c, t), FitError);
  for (auto* m : {&c.C, &c.resamples[0], &c.resamples[1], &c.resamples[2], &c.resamples[3]}) fill(0.1, *m);
  EXPECT_NEAR(green_kubo_diffusivity(c, t).D_hat, 0.1, 1e-12);
}

TEST(GreenKubo, TooFewPoints) {
  const ThermoSummary t = thermo(harmonic(), 1.0);
  EXPECT_THROW(green_kubo_diffusivity(gaussian_correlation(64, 0.4, 1.0, 1.0, 4, 1.0), t), FitError);
}

TEST(HeatKernel, ExactGaussianHasZeroDistance) {
  const ThermoSummary t = thermo(harmonic(), 1.0);
  const CorrelationEstimate c = gaussian_correlation(128, 0.4, 0.0, 1.0, 21, 5.0);
  EXPECT_LT(heat_kernel_l1(c, t, 0.4, 20), 1e-12);
  EXPECT_GT(heat_kernel_l1(c, t, 0.2, 20), 0.1);
  EXPECT_THROW(heat_kernel_l1(c, t, 0.4, 0), Error);
}

TEST(ModeRelaxation, RecoversSyntheticRate) {
  const ModeCorrelation m = exponential_mode(2, 0.4, 300, 1e-4);
  const DiffusivityEstimate e = mode_relaxation(m);
  EXPECT_EQ(e.method, EstimateMethod::mode_relaxation);
  EXPECT_NEAR(e.D_hat, 0.4, 1e-12);
  EXPECT_EQ(e.diagnostics.at("window_truncated"), 0.0);
  EXPECT_LE(e.diagnostics.at("rho_first"), 0.9);
  EXPECT_GE(e.diagnostics.at("rho_last"), 0.2);
  EXPECT_NEAR(e.std_error, 0.4 * 0.02, 1e-3);
}

TEST(ModeRelaxation, TruncatedRecordIsFlagged) {
  const ModeCorrelation m = exponential_mode(1, 0.4, 120, 2e-4);
  const DiffusivityEstimate e = mode_relaxation(m);
  EXPECT_EQ(e.diagnostics.at("window_truncated"), 1.0);
  EXPECT_NEAR(e.D_hat, 0.4, 1e-12);
}

TEST(ModeRelaxation, InsufficientDecayRejected) {
  EXPECT_THROW(mode_relaxation(exponential_mode(1, 0.4, 10, 1e-5)), FitError);
}

TEST(KappaBounds, HarmonicExamples) {
  const ThermoSummary t = thermo(harmonic(), 1.0);
  const KappaBounds one = kappa_bounds(t, 1.0);
  EXPECT_NEAR(one.lower, 0.25, 1e-12);
  EXPECT_NEAR(one.upper, 1.0, 1e-12);
  const KappaBounds two = kappa_bounds(t, 2.0);
  EXPECT_NEAR(two.lower, 0.5, 1e-12);
  EXPECT_NEAR(two.upper, 0.875, 1e-12);
  EXPECT_THROW(kappa_bounds(t, 0.0), Error);
}

TEST(KappaBounds, SandwichHarmonicValue) {
  for (double beta : {1.0, 2.0})
    for (double gamma : {0.5, 1.0, 2.0}) {
      const KappaBounds b = kappa_bounds(thermo(harmonic(), beta), gamma);
      const double kappa = gamma / 4 + 1 / (6 * gamma);
      EXPECT_LE(b.lower, kappa);
      EXPECT_GE(b.upper, kappa);
    }
}

TEST(KappaBounds, LogCoshOrdered) {
  const KappaBounds b = kappa_bounds(thermo(log_cosh(0.015), 1.0), 1.0);
  EXPECT_LT(b.lower, b.upper);
  EXPECT_GT(b.upper, 1.0);
  EXPECT_LT(b.upper, 1.0 + 0.015 / 4);
}

TEST(GapRelaxation, SmokeAndDeterminism) {
  GapOptions o;
  o.replicas = 64;
  o.records = 60;
  o.bootstrap = 20;
  o.mixing_sweeps = 50;
  o.seed = 5;
  const auto a = gap_relaxation(harmonic(), {4}, 1.0, o);
  ASSERT_EQ(a.size(), 1u);
  EXPECT_GT(a[0].tau_hat, 0.0);
  EXPECT_NEAR(a[0].rho[0], 1.0, 1e-15);
  EXPECT_LT(a[0].fit_lo, a[0].fit_hi);
  o.parallelism = 4;
  const auto b = gap_relaxation(harmonic(), {4}, 1.0, o);
  EXPECT_EQ(a[0].tau_hat, b[0].tau_hat);
  EXPECT_EQ(a[0].std_error, b[0].std_error);
  EXPECT_EQ(a[0].rho, b[0].rho);
}

// For the harmonic chain the mean squares p_i^2, r_i^2 under the noise evolve by the
// Laplacian of the path r_1 - p_1 - r_2 - p_2 - ... - p_L, so tau = 1 / (gamma (2 - 2 cos(pi / 2L))).
TEST(GapRelaxation, HarmonicMatchesPathLaplacian) {
  GapOptions o;
  o.seed = 17;
  o.replicas = 1600;
  for (double gamma : {1.0, 2.0}) {
    o.gamma = gamma;
    for (const GapRow& row : gap_relaxation(harmonic(), {4, 6}, 1.0, o)) {
      const double exact = 1 / (gamma * (2 - 2 * std::cos(std::numbers::pi / (2.0 * static_cast<double>(row.L)))));
      EXPECT_NEAR(row.tau_hat, exact, 3 * row.std_error) << "L = " << row.L << ", gamma = " << gamma;
      EXPECT_LT(row.std_error, 0.05 * exact);
    }
  }
}

TEST(GapRelaxation, RejectsBadArguments) {
  EXPECT_THROW(gap_relaxation(harmonic(), {4}, 0.0), Error);
  GapOptions o;
  o.replicas = 1;
  EXPECT_THROW(gap_relaxation(harmonic(), {4}, 1.0, o), Error);
}

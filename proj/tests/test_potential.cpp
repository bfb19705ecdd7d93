#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "chainlab/error.hpp"
#include "chainlab/potential.hpp"
#include "chainlab/quadrature.hpp"

using namespace chainlab;

namespace {

Potential harmonic() { return make_potential({}); }

Potential log_cosh(double eps) {
  PotentialSpec s;
  s.family = "log-cosh";
  s.epsilon = eps;
  return make_potential(s);
}

double relative(double a, double b) { return std::abs(a - b) / std::abs(b); }

}  // namespace

TEST(Quadrature, GaussianIntegral) {
  const double v = integrate([](double x) { return std::exp(-x * x / 2); }, -12, 12);
  EXPECT_NEAR(v, std::sqrt(2 * std::numbers::pi), 1e-13);
}

TEST(Quadrature, PolynomialExact) {
  EXPECT_NEAR(integrate([](double x) { return x * x * x * x; }, 0, 2), 32.0 / 5.0, 1e-13);
}

TEST(Quadrature, ReportsNonConvergence) {
  EXPECT_THROW(integrate([](double x) { return 1.0 / std::sqrt(std::abs(x)); }, -1, 1, 1e-15),
               QuadratureError);
}

TEST(Potential, ThresholdValue) { EXPECT_NEAR(convexity_ratio_threshold(), 0.98218, 5e-6); }

TEST(Potential, HarmonicConstants) {
  const Potential v = harmonic();
  EXPECT_EQ(v.delta_minus(), 1.0);
  EXPECT_EQ(v.delta_plus(), 1.0);
  EXPECT_TRUE(v.satisfies_iii());
  EXPECT_EQ(v.V(2.0), 2.0);
  EXPECT_EQ(v.dV(-3.0), -3.0);
  EXPECT_EQ(v.d2V(0.4), 1.0);
}

TEST(Potential, LogCoshSmallEpsilonSatisfiesGapCondition) {
  const Potential v = log_cosh(0.015);
  EXPECT_EQ(v.delta_minus(), 1.0);
  EXPECT_DOUBLE_EQ(v.delta_plus(), 1.015);
  EXPECT_NEAR(v.delta_minus() / v.delta_plus(), 0.98522, 5e-6);
  EXPECT_TRUE(v.satisfies_iii());
}

TEST(Potential, LogCoshLargerEpsilonIsFlaggedNotRejected) {
  const Potential v = log_cosh(0.05);
  EXPECT_NEAR(v.delta_minus() / v.delta_plus(), 0.95238, 5e-6);
  EXPECT_FALSE(v.satisfies_iii());
  EXPECT_TRUE(v.supported());
}

TEST(Potential, LogCoshDerivatives) {
  const Potential v = log_cosh(0.3);
  for (double r : {-7.0, -1.3, -0.2, 0.0, 1e-9, 0.37, 0.5, 0.51, 2.0, 30.0}) {
    EXPECT_NEAR(v.V(r), r * r / 2 + 0.3 * std::log(std::cosh(r)), 1e-14 * std::max(1.0, v.V(r)));
    EXPECT_NEAR(v.dV(r), r + 0.3 * std::tanh(r), 4e-16 * std::max(1.0, std::abs(r)));
    EXPECT_NEAR(v.d2V(r), 1 + 0.3 / (std::cosh(r) * std::cosh(r)), 1e-15);
  }
}

TEST(Potential, QuarticRejectedNamingAssumption) {
  PotentialSpec s;
  s.family = "fpu-beta";
  s.quartic = 1.0;
  try {
    make_potential(s);
    FAIL() << "expected AssumptionError";
  } catch (const AssumptionError& e) {
    EXPECT_NE(std::string(e.what()).find("assumption (ii)"), std::string::npos);
  }
  s.allow_unsupported = true;
  const Potential v = make_potential(s);
  EXPECT_FALSE(v.supported());
  EXPECT_FALSE(v.satisfies_iii());
}

TEST(Potential, NegativeEpsilonRejected) {
  PotentialSpec s;
  s.family = "log-cosh";
  s.epsilon = -0.1;
  EXPECT_THROW(make_potential(s), AssumptionError);
}

TEST(Potential, CustomPotentialChecksAssumptions) {
  CustomPotential wide{[](double r) { return r * r; }, [](double r) { return 2 * r; },
                       [](double) { return 2.0; }};
  EXPECT_NO_THROW(make_custom_potential("double", wide, 2.0, 2.0));
  EXPECT_THROW(make_custom_potential("double", wide, 1.0, 1.5), AssumptionError);
  CustomPotential skew{[](double r) { return r * r / 2 + 0.01 * r * r * r; },
                       [](double r) { return r + 0.03 * r * r; }, [](double r) { return 1 + 0.06 * r; }};
  EXPECT_THROW(make_custom_potential("skew", skew, 0.1, 2.0), AssumptionError);
}

TEST(Potential, SymmetryAndConvexityGrid) {
  for (const Potential& v : {harmonic(), log_cosh(0.015), log_cosh(0.5)}) {
    for (int k = 0; k <= 1000; ++k) {
      const double r = -10.0 + 20.0 * k / 1000;
      EXPECT_EQ(v.V(r) - v.V(-r), 0.0);
      EXPECT_GE(v.d2V(r), v.delta_minus() - 1e-12);
      EXPECT_LE(v.d2V(r), v.delta_plus() + 1e-12);
    }
    EXPECT_EQ(v.V(0.0), 0.0);
  }
}

TEST(Potential, InverseOfV) {
  const Potential v = log_cosh(0.5);
  for (double r : {1e-6, 0.1, 0.9, 3.0, 12.0}) {
    const double level = v.V(r);
    EXPECT_NEAR(v.inverse_positive(level), r, 1e-13 * r);
    EXPECT_NEAR(v.inverse_positive(level, r * 1.001), r, 1e-13 * r);
  }
  EXPECT_EQ(v.inverse_positive(0.0), 0.0);
  EXPECT_DOUBLE_EQ(harmonic().inverse_positive(2.0), 2.0);
}

TEST(Thermo, HarmonicBetaOne) {
  const ThermoSummary t = thermo(harmonic(), 1.0);
  EXPECT_NEAR(t.Z_beta, 2.50663, 5e-6);
  EXPECT_NEAR(t.Z_beta, std::sqrt(2 * std::numbers::pi), 1e-12);
  EXPECT_NEAR(t.mean_energy, 1.0, 1e-12);
  EXPECT_NEAR(t.chi, 1.0, 1e-12);
  EXPECT_NEAR(t.mean_r2, 1.0, 1e-12);
  EXPECT_NEAR(t.mean_dV2, 1.0, 1e-12);
  EXPECT_NEAR(t.mean_d2V, 1.0, 1e-12);
}

TEST(Thermo, HarmonicBetaTwo) {
  const ThermoSummary t = thermo(harmonic(), 2.0);
  EXPECT_NEAR(t.mean_energy, 0.5, 1e-12);
  EXPECT_NEAR(t.chi, 0.25, 1e-12);
}

TEST(Thermo, LogCoshCurvatureBetweenBounds) {
  const ThermoSummary t = thermo(log_cosh(0.015), 1.0);
  EXPECT_GT(t.mean_d2V, 1.0);
  EXPECT_LT(t.mean_d2V, 1.015);
}

TEST(Thermo, InvariantsAcrossPotentials) {
  for (const Potential& v : {harmonic(), log_cosh(0.015), log_cosh(0.5)}) {
    for (double beta : {0.5, 1.0, 2.0}) {
      const ThermoSummary t = thermo(v, beta);
      EXPECT_NEAR(t.mean_energy, 1 / (2 * beta) + t.mean_V, 1e-15);
      EXPECT_LT(relative(t.chi_derivative, t.chi), 1e-8);
      EXPECT_LT(relative(t.mean_dV_r, 1 / beta), 1e-8);
    }
  }
}

TEST(Thermo, MeanEnergyDecreasesInBeta) {
  for (const Potential& v : {harmonic(), log_cosh(0.015)}) {
    double previous = INFINITY;
    for (double beta : {0.25, 0.5, 1.0, 2.0, 4.0}) {
      const double e = thermo(v, beta).mean_energy;
      EXPECT_LT(e, previous);
      previous = e;
    }
  }
}

TEST(Thermo, RejectsNonpositiveBeta) { EXPECT_THROW(thermo(harmonic(), 0.0), Error); }

TEST(BetaOfEnergy, HarmonicOracle) {
  EXPECT_NEAR(beta_of_energy(harmonic(), 1.0), 1.0, 1e-10);
  EXPECT_NEAR(beta_of_energy(harmonic(), 0.5), 2.0, 1e-10);
}

TEST(BetaOfEnergy, RoundTrip) {
  for (const Potential& v : {harmonic(), log_cosh(0.015), log_cosh(0.5)}) {
    for (double beta : {0.5, 1.0, 2.0}) {
      const double e = thermo(v, beta).mean_energy;
      EXPECT_LT(relative(beta_of_energy(v, e), beta), 1e-8);
      EXPECT_LT(std::abs(thermo(v, beta_of_energy(v, e)).mean_energy - e), 1e-10);
    }
  }
}

TEST(BetaOfEnergy, RejectsNonpositiveEnergy) {
  EXPECT_THROW(beta_of_energy(harmonic(), 0.0), Error);
  EXPECT_THROW(beta_of_energy(harmonic(), -1.0), Error);
}

TEST(GibbsExpectation, QuarticMoment) {
  EXPECT_NEAR(gibbs_expectation(harmonic(), 2.0, [](double r) { return r * r * r * r; }, true),
              3.0 / 4.0, 1e-12);
  EXPECT_NEAR(gibbs_expectation(log_cosh(0.3), 1.0, [](double r) { return r; }), 0.0, 1e-14);
}

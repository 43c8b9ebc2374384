#include <cmath>

#include <gtest/gtest.h>

#include "heavyconc/weak_poincare.hpp"

using namespace heavyconc;

TEST(TestFunctionMoments, RampOnExponentialLaw) {
  auto e = make_potential_measure(potential_linear());
  const double x = 2.0, d = 0.5, a = x - d;
  // mean = (e^{-a} - e^{-x}) / (2 d), energy = (e^{-a} - e^{-x}) / (2 d^2)
  const double mass = std::exp(-a) - std::exp(-x);
  // E f^2: int_a^x ((t-a)/d)^2 e^{-t}/2 + e^{-x}/2
  //      = (1/(2 d^2)) [2 e^{-a} - (d^2 + 2d + 2) e^{-x}] + e^{-x}/2
  const double second = (2 * std::exp(-a) - (d * d + 2 * d + 2) * std::exp(-x)) / (2 * d * d) +
                        std::exp(-x) / 2;
  auto m = test_function_moments(e, {TestShape::UpperRamp, x, d, "r"});
  EXPECT_NEAR(m.energy, mass / (2 * d * d), 1e-13);
  EXPECT_NEAR(m.variance, second - std::pow(mass / (2 * d), 2), 1e-13);
  EXPECT_EQ(m.osc2, 1.0);
  auto lower = test_function_moments(e, {TestShape::LowerRamp, -x, d, "l"});
  EXPECT_NEAR(lower.variance, m.variance, 1e-13);
  EXPECT_NEAR(lower.energy, m.energy, 1e-13);
}

TEST(TestFunctionMoments, SymmetricSigmoidAndTent) {
  auto m = make_power_law(2.0);
  auto sig = test_function_moments(m, {TestShape::Sigmoid, 0.0, 1.0, "s"});
  EXPECT_EQ(sig.osc2, 4.0);
  EXPECT_GT(sig.variance, 0.0);
  EXPECT_LT(sig.variance, 1.0);
  // tent of half-width w at 0 on m_2: energy = mu([-w, w]) / w^2
  auto tent = test_function_moments(m, {TestShape::Tent, 0.0, 3.0, "t"});
  EXPECT_NEAR(tent.energy, (1 - std::pow(4.0, -2.0)) / 9.0, 1e-12);
}

TEST(VerifyWp, TrivialAboveQuarter) {
  auto m = make_power_law(1.0);
  auto rep = verify_wp_from_criterion(m, beta_monomial(2.0, 1e-9), default_test_family(m),
                                      {0.25, 0.3, 0.5});
  EXPECT_EQ(rep.violations, 0u);
  EXPECT_LE(rep.max_ratio, 1.0);
}

TEST(VerifyWp, CalibratedGammaHasNoViolations) {
  for (const auto& [m, b] : {std::pair{make_power_law(1.0), beta_monomial(2.0)},
                             std::pair{make_power_law(3.0), beta_power_law(3.0)},
                             std::pair{make_stretched_exp(0.5), beta_stretched_exp(0.5)}}) {
    auto gamma = criterion_gamma(m, b);
    auto rep = verify_wp_from_criterion(m, gamma);
    EXPECT_EQ(rep.violations, 0u) << m.descriptor();
    EXPECT_GT(rep.criterion_min, 0.999) << m.descriptor();
    EXPECT_GT(rep.max_ratio, 0.0);
  }
}

TEST(VerifyWp, DetectsViolationsForTooSmallGamma) {
  auto m = make_power_law(1.0);
  auto rep = verify_wp_from_criterion(m, beta_monomial(2.0, 1e-6));
  EXPECT_GT(rep.violations, 0u);
  EXPECT_FALSE(rep.criterion_holds());
}

TEST(VerifyWp, WpScaleIsTwelveTimesB) {
  auto m = make_power_law(2.0);
  auto b = beta_power_law(2.0);
  auto c = compute_criterion_constants(m, b);
  EXPECT_DOUBLE_EQ(calibrate_wp_scale(m, b), c.upper_C);
  EXPECT_THROW(calibrate_wp_scale(m, beta_monomial(0.5)), NumericalError);
}

#include <cmath>

#include <gtest/gtest.h>

#include "heavyconc/capacity.hpp"

using namespace heavyconc;

TEST(HalfLineCapacity, ClosedForms) {
  auto m1 = make_power_law(1.0);
  EXPECT_NEAR(half_line_capacity(m1, 1.0).value, 3.0 / 14.0, 1e-10);
  EXPECT_NEAR(half_line_capacity(m1, -1.0).value, 3.0 / 14.0, 1e-10);
  EXPECT_NEAR(half_line_capacity(make_power_law(2.0), 1.0).value, 4.0 / 15.0, 1e-10);
  // exponential law: int_0^x 2 e^u du = 2(e^x - 1)
  auto e = make_potential_measure(potential_linear());
  EXPECT_NEAR(half_line_capacity(e, 3.0).value, 1 / (2 * std::expm1(3.0)), 1e-12);
  EXPECT_THROW(half_line_capacity(m1, 0.0), DomainError);
}

TEST(HalfLineCapacity, MonotoneAndBlowsUpAtMedian) {
  auto m = make_stretched_exp(0.5);
  double prev = kInf;
  for (double x = 1e-8; x < 1e4; x *= 1.7) {
    const double c = half_line_capacity(m, x).value;
    EXPECT_LT(c, prev);
    prev = c;
  }
  EXPECT_GT(half_line_capacity(m, 1e-9).value, 1e8);
}

TEST(HalfLineCapacity, FarTailDoesNotOverflow) {
  auto m = make_stretched_exp(0.3);
  const double x = m.upper_quantile(1e-200);
  auto c = half_line_capacity(m, x);
  EXPECT_FALSE(c.divergent);
  EXPECT_GT(c.value, 0.0);
  EXPECT_TRUE(std::isfinite(log_inverse_density_integral(m, x)));
}

TEST(HalfLineCapacity, Additivity) {
  // 1/capa(x) is additive over [0,a] + [a,b].
  auto m = make_power_law(3.0);
  const double a = 0.7, b = 5.0;
  QuadratureOptions o;
  o.abs_tol = 1e-12;
  const double mid = integrate([&](double u) { return 1 / m.density(u); }, a, b, o).value;
  EXPECT_NEAR(1 / half_line_capacity(m, b).value, 1 / half_line_capacity(m, a).value + mid,
              1e-9 * mid);
}

TEST(CriterionConstants, M1WithInverseSquare) {
  auto c = compute_criterion_constants(make_power_law(1.0), beta_monomial(2.0));
  EXPECT_NEAR(c.b_plus.value, 1.0 / 192.0, 1e-5);
  EXPECT_NEAR(c.b_minus.value, 1.0 / 192.0, 1e-5);
  // B uses beta(tau): 1/3 in the limit, since (tau/4)^2 -> tau^2 gains 16.
  EXPECT_NEAR(c.B_plus.value, 16.0 / 192.0, 1e-5);
  EXPECT_TRUE(c.finite());
  EXPECT_TRUE(c.stable());
  EXPECT_LE(c.lower_C, c.upper_C);
}

TEST(CriterionConstants, TooWeakBetaDiverges) {
  for (double alpha : {1.0, 2.0}) {
    auto c = compute_criterion_constants(make_power_law(alpha), beta_monomial(1.0 / alpha));
    EXPECT_TRUE(c.B_plus.divergent);
    EXPECT_GT(c.B_plus.value_4n, 10 * c.B_plus.value_n);
    EXPECT_FALSE(c.finite());
  }
}

TEST(CriterionConstants, M2WithInverse) {
  auto c = compute_criterion_constants(make_power_law(2.0), beta_monomial(1.0));
  EXPECT_FALSE(c.B_plus.divergent);
  EXPECT_TRUE(c.B_plus.stable);
  EXPECT_NEAR(c.B_plus.value, 1.0 / 16.0, 1e-5);
}

TEST(CriterionConstants, HugeBetaGivesNearZero) {
  // The exponential law has a spectral gap, so a constant beta is admissible.
  auto e = make_potential_measure(potential_linear());
  auto c = compute_criterion_constants(e, beta_constant(1e300));
  EXPECT_TRUE(c.finite());
  EXPECT_LT(c.upper_C, 1e-290);
  EXPECT_GT(c.upper_C, 0.0);
}

TEST(CriterionConstants, ScalingCovariance) {
  auto m = make_stretched_exp(0.5);
  auto b = beta_stretched_exp(0.5);
  auto c1 = compute_criterion_constants(m, b);
  auto c2 = compute_criterion_constants(m, b.scaled(8.0));
  EXPECT_EQ(c1.B_plus.value / 8.0, c2.B_plus.value);
  EXPECT_EQ(c1.b_minus.value / 8.0, c2.b_minus.value);
  auto c3 = compute_criterion_constants(m, b.scaled(10.0));
  EXPECT_NEAR(c1.B_plus.value / 10.0, c3.B_plus.value, 1e-14 * c3.B_plus.value);
  EXPECT_NEAR(c1.b_plus.value / 10.0, c3.b_plus.value, 1e-14 * c3.b_plus.value);
}

TEST(CriterionConstants, LowerBelowUpperAcrossPairs) {
  for (const auto& [m, b] : {std::pair{make_power_law(1.0), beta_power_law(1.0)},
                             std::pair{make_power_law(2.0), beta_power_law(2.0)},
                             std::pair{make_stretched_exp(0.5), beta_stretched_exp(0.5)},
                             std::pair{make_stretched_exp(0.8), beta_stretched_exp(0.8)}}) {
    auto c = compute_criterion_constants(m, b);
    EXPECT_TRUE(c.finite()) << m.descriptor();
    EXPECT_LE(c.lower_C, c.upper_C) << m.descriptor();
  }
}

TEST(BetaTilde, Examples) {
  EXPECT_NEAR(beta_tilde(beta_constant(2.0), 0.4), 0.1, 1e-12);
  EXPECT_NEAR(beta_tilde(beta_monomial(1.0), 0.4), 0.01, 1e-14);
  const double v = beta_tilde(beta_monomial(2.0), 0.2);
  EXPECT_GE(v, 0.05 * 0.05 * 0.05);
  EXPECT_LE(v, 0.1 * 0.01);
}

TEST(BetaTilde, SandwichAndMonotone) {
  for (const auto& b : {beta_power_law(1.0), beta_stretched_exp(0.3), beta_constant(3.0)}) {
    double prev = 0.0;
    for (double a = 0.001; a < 0.5; a *= 1.3) {
      const double v = beta_tilde(b, a);
      EXPECT_GE(v, a / (4 * b.eval(a / 4)) * (1 - 1e-15));
      EXPECT_LE(v, a / (2 * b.eval(a / 2)) * (1 + 1e-15));
      EXPECT_GE(v, prev);
      prev = v;
    }
  }
}

TEST(CapacityLowerBound, M1) {
  auto m1 = make_power_law(1.0);
  auto r = check_capacity_lower_bound(m1, beta_monomial(2.0));
  EXPECT_GT(r.min_ratio, 0.0);
  EXPECT_TRUE(r.stable);
  // closed form: 768 (1+x)^3 / ((1+x)^3 - 1) >= 768
  EXPECT_NEAR(r.min_ratio, 768.0, 1e-6 * 768.0);
  auto r10 = check_capacity_lower_bound(m1, beta_monomial(2.0, 10.0));
  ASSERT_EQ(r.rows.size(), r10.rows.size());
  for (std::size_t i = 0; i < r.rows.size(); ++i) {
    EXPECT_NEAR(r10.rows[i].ratio, 10 * r.rows[i].ratio, 1e-15 * r10.rows[i].ratio);
  }
}

TEST(CapacityLowerBound, SymmetricSides) {
  auto r = check_capacity_lower_bound(make_stretched_exp(0.5), beta_stretched_exp(0.5), 64);
  const std::size_t half = r.rows.size() / 2;
  for (std::size_t i = 0; i < half; ++i) {
    EXPECT_EQ(r.rows[i].side, Side::Upper);
    EXPECT_EQ(r.rows[half + i].side, Side::Lower);
    EXPECT_NEAR(r.rows[i].ratio, r.rows[half + i].ratio, 1e-9 * r.rows[i].ratio);
  }
}

TEST(Corollary, SqrtPotential) {
  auto m = make_stretched_exp(0.5);
  auto rep = check_corollary_wp(m, 0.4, beta_from_potential(potential_power(0.5)), 1e6);
  EXPECT_TRUE(rep.admissible);
  EXPECT_GT(rep.c_estimate, 0.0);
  // |Phi''|/Phi'^2 = x^{-1/2} <= 0.6 once x >= 1/0.36
  EXPECT_LE(rep.interval_bound, 12.0);
  EXPECT_GE(rep.interval_bound, 1 / 0.36);
  EXPECT_LE(rep.max_curvature, 0.6);
}

TEST(Corollary, ExponentialLaw) {
  auto m = make_potential_measure(potential_linear());
  auto rep = check_corollary_wp(m, 0.3, beta_constant(2.5), 50.0);
  EXPECT_TRUE(rep.admissible);
  EXPECT_NEAR(rep.c_estimate, 2.5, 1e-15);
}

TEST(Corollary, LogPotentialFails) {
  auto spec = potential_log1p(1.0);
  for (double eps : {0.01, 0.5, 0.9}) {
    auto rep = check_corollary_wp(spec, [&](double x) { return std::exp(-spec.phi(x)); }, eps,
                                  beta_constant(1.0), 1e6);
    EXPECT_FALSE(rep.admissible);
  }
}

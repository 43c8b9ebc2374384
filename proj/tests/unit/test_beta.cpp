#include <cmath>

#include <gtest/gtest.h>

#include "heavyconc/beta.hpp"

using namespace heavyconc;

TEST(BetaPowerLaw, Values) {
  EXPECT_NEAR(beta_power_law(2.0).eval(0.01), 100.0, 1e-11);
  EXPECT_NEAR(beta_power_law(1.0, 3.0).eval(0.25), 48.0, 1e-12);
  EXPECT_EQ(beta_power_law(2.0).wp_value(0.25), 0.0);
  EXPECT_EQ(beta_power_law(2.0).wp_value(0.3), 0.0);
  for (double alpha : {0.5, 1.0, 3.0}) {
    auto b = beta_power_law(alpha);
    for (double s : {1e-9, 1e-4, 0.1}) {
      EXPECT_NEAR(b.eval(2 * s) / b.eval(s), std::pow(2.0, -2.0 / alpha), 1e-14);
    }
  }
  EXPECT_EQ(beta_power_law(2.0).provenance(), BetaProvenance::PowerLawExample);
}

TEST(BetaPowerLaw, LogLogSlope) {
  for (double alpha : {0.5, 1.0, 2.0, 3.0}) {
    auto b = beta_power_law(alpha);
    for (int i = 0; i < 50; ++i) {
      const double s = std::pow(10.0, -12.0 + 11.0 * i / 50.0);
      const double h = 1e-4;
      const double slope = (std::log(b.eval(s * std::exp(h))) - std::log(b.eval(s * std::exp(-h)))) / (2 * h);
      EXPECT_NEAR(slope, -2.0 / alpha, 1e-9);
    }
  }
}

TEST(BetaStretchedExp, Values) {
  EXPECT_NEAR(beta_stretched_exp(0.5).eval(2 * std::exp(-10.0)), 100.0, 1e-10);
  EXPECT_NEAR(beta_stretched_exp(0.5, 2.0).eval(2 * std::exp(-10.0)), 200.0, 1e-10);
  auto b = beta_stretched_exp(0.3);
  for (double s = 1e-10; s < 0.2; s *= 1.5) EXPECT_GT(b.eval(s), b.eval(s * 1.5));
  // exponent 2/p - 2 vanishes as p -> 1
  EXPECT_NEAR(beta_stretched_exp(0.999999).eval(1e-8), 1.0, 1e-4);
  EXPECT_THROW(beta_stretched_exp(1.0), DomainError);
}

TEST(BetaFromPotential, PowerPotential) {
  auto b = beta_from_potential(potential_power(0.5));
  EXPECT_NEAR(b.eval(std::exp(-4.0)), 64.0, 1e-10);
  // p^{-2} (log 1/s)^{2(1-p)/p}
  for (double p : {0.3, 0.8}) {
    auto bp = beta_from_potential(potential_power(p));
    for (double s : {1e-12, 1e-6, 0.01, 0.2}) {
      const double y = std::log(1 / s);
      EXPECT_NEAR(bp.eval(s), std::pow(p, -2.0) * std::pow(y, 2 * (1 - p) / p), 1e-10 * bp.eval(s));
    }
  }
  EXPECT_NEAR(beta_from_potential(potential_linear()).eval(1e-3), 1.0, 1e-15);
  EXPECT_EQ(b.provenance(), BetaProvenance::FromPotential);
}

TEST(BetaFromPotential, ClampingIsFlagged) {
  auto b = beta_from_potential(potential_power(0.5));
  EXPECT_TRUE(b.clamped(0.45));   // log(1/0.45) < Phi(1) = 1
  EXPECT_FALSE(b.clamped(0.2));
  EXPECT_EQ(b.eval(0.45), b.eval(std::exp(-1.0)));
}

TEST(BetaFromPotential, NumericInverseAgreesWithClosedForm) {
  // plog with alpha -> 0 is not available; use a numeric inverse of x^p.
  auto spec = potential_power(0.5);
  spec.phi_inverse = [spec](double y) { return detail::invert_increasing(spec.phi, spec.phi_prime, y); };
  auto a = beta_from_potential(spec);
  auto b = beta_from_potential(potential_power(0.5));
  for (double s : {1e-14, 1e-5, 0.1}) EXPECT_NEAR(a.eval(s), b.eval(s), 1e-9 * b.eval(s));
}

TEST(Tensorise, Identities) {
  auto b = beta_monomial(2.0);
  EXPECT_NEAR(tensorise_beta(b, 4).eval(0.1), 1600.0, 1e-9);
  auto base = beta_stretched_exp(0.5);
  EXPECT_EQ(tensorise_beta(base, 1).eval(0.123), base.eval(0.123));
  for (int i = 0; i < 100; ++i) {
    const double s = 1e-10 * std::pow(2.4e9, i / 99.0);
    EXPECT_EQ(tensorise_beta(tensorise_beta(base, 6), 7).eval(s), tensorise_beta(base, 42).eval(s));
    EXPECT_GE(tensorise_beta(base, 5).eval(s), base.eval(s));
  }
  for (double alpha : {0.5, 1.0, 2.0, 3.0}) {
    auto p = beta_power_law(alpha);
    for (int i = 0; i < 100; ++i) {
      const double s = 1e-10 * std::pow(2.4e9, i / 99.0);
      const auto n = static_cast<std::uint64_t>(1 + 37 * i);
      EXPECT_NEAR(tensorise_beta(p, n).eval(s), std::pow(double(n), 2 / alpha) * p.eval(s),
                  1e-9 * tensorise_beta(p, n).eval(s));
    }
  }
  EXPECT_EQ(tensorise_beta(base, 8).dimension(), 8u);
  EXPECT_THROW(tensorise_beta(base, 0), DomainError);
}

TEST(BetaTable, InterpolatesAndValidates) {
  auto t = beta_table({{1e-6, 1e6}, {1e-3, 1e3}, {0.25, 4.0}});
  EXPECT_NEAR(t.eval(1e-4), 1e4, 1e-6);
  EXPECT_NEAR(t.eval(1e-9), 1e6, 0);
  EXPECT_THROW(beta_table({{1e-3, 1.0}, {0.1, 2.0}}), DomainError);
}

TEST(BetaParse, RoundTrip) {
  auto b = parse_beta("power:2@3/n=4");
  EXPECT_EQ(b.descriptor(), "power:2@3/n=4");
  EXPECT_NEAR(b.eval(0.1), 3 * 40.0, 1e-12);
  EXPECT_EQ(parse_beta(b.descriptor()).eval(0.01), b.eval(0.01));
  EXPECT_EQ(parse_beta("const@2.5").eval(0.001), 2.5);
  EXPECT_EQ(parse_beta("potential:pow:0.5").provenance(), BetaProvenance::FromPotential);
  EXPECT_THROW(parse_beta("power"), ParseError);
  EXPECT_THROW(parse_beta("power:2@-1"), ParseError);
  EXPECT_THROW(parse_beta("foo:1"), ParseError);
}

TEST(BetaFunction, AllConstructorsAreNonIncreasing) {
  for (const auto& b : {beta_power_law(0.7), beta_stretched_exp(0.4),
                        beta_from_potential(potential_plog(0.5, 1.0)), beta_constant(2.0),
                        beta_monomial(0.5), tensorise_beta(beta_stretched_exp(0.8), 1000)}) {
    EXPECT_TRUE(std::isnan(find_monotonicity_violation(b))) << b.descriptor();
  }
}

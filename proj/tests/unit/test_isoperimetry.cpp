#include <algorithm>
#include <cmath>

#include <gtest/gtest.h>

#include "heavyconc/isoperimetry.hpp"

using namespace heavyconc;

TEST(IsoProfile, PowerLawClosedForm) {
  for (double alpha : {0.5, 1.0, 2.0, 3.0}) {
    auto iso = iso_profile(make_power_law(alpha));
    for (int i = 0; i < 100; ++i) {
      const double t = 1e-6 * std::pow(0.5e6, (i + 0.5) / 100.0);
      const double exact = alpha * std::pow(t, 1 + 1 / alpha);
      EXPECT_NEAR(iso.profile(t), exact, 1e-9 * exact) << alpha << " " << t;
      EXPECT_NEAR(iso.j_function(t), alpha * std::pow(2.0, 1 / alpha) * std::pow(t, 1 + 1 / alpha),
                  1e-9 * exact);
    }
  }
  EXPECT_NEAR(iso_profile(make_power_law(1.0)).profile(0.25), 0.0625, 1e-15);
  EXPECT_NEAR(iso_profile(make_power_law(2.0)).j_function(0.1), 2 * std::sqrt(2.0) * std::pow(0.1, 1.5), 1e-14);
}

TEST(IsoProfile, Invariants) {
  for (const auto& m : {make_power_law(1.5), make_stretched_exp(0.5),
                        make_potential_measure(potential_plog(0.5, 1.0))}) {
    auto iso = iso_profile(m);
    for (double t = 0.003; t < 0.5; t += 0.011) {
      EXPECT_NEAR(iso.profile(t), iso.profile(1 - t), 1e-9 * iso.profile(t));
      EXPECT_LE(iso.profile(t), iso.j_function(t));
    }
    EXPECT_LT(iso.profile(1e-12), 1e-10);
    EXPECT_LT(iso.profile(1 - 1e-12), 1e-10);
    EXPECT_THROW(iso.profile(0.0), DomainError);
  }
}

TEST(IsoProfile, StretchedExpComparableToLogForm) {
  // Observed envelope of I(t) / (t log(1/t)^{1-1/p}) on [1e-6, 0.1].
  for (double p : {0.5, 0.8}) {
    auto iso = iso_profile(make_stretched_exp(p));
    double lo = kInf, hi = 0;
    for (int i = 0; i <= 200; ++i) {
      const double t = 1e-6 * std::pow(1e5, i / 200.0);
      const double r = iso.profile(t) / (t * std::pow(std::log(1 / t), 1 - 1 / p));
      lo = std::min(lo, r);
      hi = std::max(hi, r);
    }
    EXPECT_LT(hi / lo, 4.0) << p;
  }
}

TEST(IsoLowerBound, Formulas) {
  EXPECT_NEAR(iso_lower_bound(beta_constant(4.0), 1, 2.0, 0.3), 2.0 * 0.21 / 4.0, 1e-15);
  const double alpha = 2.0;
  auto b = beta_power_law(alpha);
  double prev = kInf;
  for (std::uint64_t n : {1u, 4u, 64u, 1024u}) {
    const double t = 0.2, p = t * (1 - t);
    const double v = iso_lower_bound(b, n, 1.0, t);
    EXPECT_NEAR(v, p * std::pow(p / (2.0 * n), 2 / alpha), 1e-15);
    EXPECT_LT(v, prev);
    prev = v;
  }
  EXPECT_LT(iso_lower_bound(beta_power_law(1.0), 1u << 30, 1.0, 0.5), 1e-18);
}

TEST(IsoProductUpperBound, SmallCases) {
  auto m1 = make_power_law(1.0);
  EXPECT_NEAR(iso_product_upper_bound(m1, 2, 0.25), 0.25, 1e-14);
  auto iso = iso_profile(make_stretched_exp(0.5));
  for (double t : {0.01, 0.3, 0.7}) EXPECT_DOUBLE_EQ(iso_product_upper_bound(iso, 1, t), iso.profile(t));
}

TEST(IsoProductUpperBound, DecayRate) {
  for (double alpha : {1.0, 2.0}) {
    auto iso = iso_profile(make_power_law(alpha));
    const double t = 0.1;
    const double n1 = std::pow(2.0, 10), n2 = std::pow(2.0, 20);
    const double slope = (std::log(iso_product_upper_bound(iso, n2, t)) -
                          std::log(iso_product_upper_bound(iso, n1, t))) /
                         std::log(n2 / n1);
    EXPECT_NEAR(slope, -1 / alpha, 0.05);
  }
}

TEST(IsoProductUpperBound, NonIncreasingPastThreshold) {
  auto iso = iso_profile(make_power_law(1.0));
  for (double t : {1e-3, 0.05}) {
    double prev = kInf;
    for (std::uint64_t n = static_cast<std::uint64_t>(std::ceil(iso_asymptotic_threshold(t))); n < 5000; n = n * 3 / 2 + 1) {
      const double v = iso_product_upper_bound(iso, n, t);
      EXPECT_LE(v, prev * (1 + 1e-12));
      prev = v;
      // the first (exact) form never exceeds the asymptotic one
      EXPECT_LE(v, iso_product_upper_bound_asymptotic(iso, n, t) * (1 + 1e-12));
    }
  }
}

TEST(IsoSandwich, LowerBelowUpperForLargeN) {
  // c1 t (t/n)^{2/alpha} <= I <= c2 ... with c1 = c(eps,R) = 1.
  for (double alpha : {1.0, 3.0}) {
    auto iso = iso_profile(make_power_law(alpha));
    auto b = beta_power_law(alpha);
    for (std::uint64_t n : {64u, 1024u, 65536u}) {
      for (double t : {1e-3, 0.1, 0.4}) {
        EXPECT_LE(iso_lower_bound(b, n, 1.0, t), iso_product_upper_bound(iso, n, t));
      }
    }
  }
}

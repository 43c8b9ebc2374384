#pragma once

// Isoperimetric profiles of even 1-D measures and bounds for products.

#include <algorithm>
#include <cmath>
#include <cstdint>

#include "heavyconc/beta.hpp"
#include "heavyconc/errors.hpp"
#include "heavyconc/measures.hpp"

namespace heavyconc {

/// I(t) = min(J(t), 2 J(min(t, 1-t)/2)) with J = rho o R^{-1}; half-lines,
/// symmetric segments and their complements are the extremal sets.
class IsoProfile {
 public:
  explicit IsoProfile(MeasureModel model) : model_(std::move(model)) {
    if (!model_.is_even()) {
      throw DomainError("iso_profile: only even measures are supported");
    }
  }

  double j_function(double t) const {
    check(t);
    return j_small(std::min(t, 1.0 - t));
  }

  double profile(double t) const {
    check(t);
    return profile_small(std::min(t, 1.0 - t));
  }

  /// Profile at t or 1 - t given u = min(t, 1 - t) directly, which keeps
  /// relative accuracy when 1 - t is not representable.
  double profile_small(double u) const {
    if (!(u > 0.0 && u <= 0.5)) throw DomainError("IsoProfile: need 0 < u <= 1/2");
    return std::min(j_small(u), 2.0 * j_small(0.5 * u));
  }

  const MeasureModel& model() const { return model_; }

 private:
  static void check(double t) {
    if (!(t > 0.0 && t < 1.0)) throw DomainError("IsoProfile: need 0 < t < 1");
  }
  // J(u) for u <= 1/2: density at the point with lower tail mass u.
  double j_small(double u) const { return model_.density(model_.lower_quantile(u)); }

  MeasureModel model_;
};

inline IsoProfile iso_profile(const MeasureModel& model) { return IsoProfile(model); }

/// c(eps, R) p / beta(p / (2n)) with p = t(1 - t); c_eR is the opaque
/// constant of the curvature-dimension argument and is never derived here.
inline double iso_lower_bound(const BetaFunction& beta, std::uint64_t n, double c_eR,
                              double t) {
  if (n == 0) throw DomainError("iso_lower_bound: need n >= 1");
  if (!(c_eR > 0.0)) throw DomainError("iso_lower_bound: need c_eR > 0");
  if (!(t > 0.0 && t < 1.0)) throw DomainError("iso_lower_bound: need 0 < t < 1");
  const double p = t * (1.0 - t);
  return c_eR * p / beta.eval(p / (2.0 * static_cast<double>(n)));
}

/// Product-set bound n t^{(n-1)/n} I(t^{1/n}) for the n-fold product.
inline double iso_product_upper_bound(const IsoProfile& iso, std::uint64_t n, double t) {
  if (n == 0) throw DomainError("iso_product_upper_bound: need n >= 1");
  if (!(t > 0.0 && t < 1.0)) throw DomainError("iso_product_upper_bound: need 0 < t < 1");
  if (n == 1) return iso.profile(t);
  const double nn = static_cast<double>(n);
  const double log_a = std::log(t) / nn;
  const double a = std::exp(log_a);
  const double u = std::min(a, -std::expm1(log_a));  // min(a, 1 - a)
  return nn * std::exp(log_a * (nn - 1.0)) * iso.profile_small(u);
}

inline double iso_product_upper_bound(const MeasureModel& model, std::uint64_t n,
                                      double t) {
  return iso_product_upper_bound(IsoProfile(model), n, t);
}

/// Asymptotic companion 2 n t I(1 - t^{1/n}), valid once
/// n >= log(1/t)/log 2.
inline double iso_product_upper_bound_asymptotic(const IsoProfile& iso, std::uint64_t n,
                                                 double t) {
  if (n == 0) throw DomainError("iso_product_upper_bound_asymptotic: need n >= 1");
  if (!(t > 0.0 && t < 1.0)) {
    throw DomainError("iso_product_upper_bound_asymptotic: need 0 < t < 1");
  }
  const double nn = static_cast<double>(n);
  const double u = -std::expm1(std::log(t) / nn);
  return 2.0 * nn * t * iso.profile_small(std::min(u, 0.5));
}

/// Smallest n for which the asymptotic form applies: log(1/t)/log 2.
inline double iso_asymptotic_threshold(double t) {
  return std::log(1.0 / t) / std::log(2.0);
}

}  // namespace heavyconc

#pragma once

// Capacities of half-lines and the measure-capacity criterion constants.

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "heavyconc/beta.hpp"
#include "heavyconc/errors.hpp"
#include "heavyconc/measures.hpp"
#include "heavyconc/numerics.hpp"

namespace heavyconc {

enum class Side { Upper, Lower };

inline const char* to_string(Side s) { return s == Side::Upper ? "upper" : "lower"; }

/// log of int_m^x 1/rho (or int_x^m for x < m), computed relative to the
/// endpoint density so that it stays finite far in the tail.
inline double log_inverse_density_integral(const MeasureModel& model, double x) {
  const double m = model.median();
  if (x == m) return -kInf;
  const double a = std::min(x, m);
  const double b = std::max(x, m);
  const double log_rho_x = model.log_density(x);
  auto g = [&](double u) { return std::exp(log_rho_x - model.log_density(u)); };
  QuadratureOptions o;
  o.abs_tol = 1e-300;
  o.rel_tol = 1e-13;
  const double inner = integrate(g, a, b, o).value;
  return std::log(inner) - log_rho_x;
}

struct HalfLineCapacity {
  double value = 0.0;
  bool divergent = false;  // int 1/rho diverged; value is reported as 0
};

/// capa([x, inf), (m, inf)) = 1 / int_m^x 1/rho for x > m, and the mirror
/// image (-inf, x] for x < m.
inline HalfLineCapacity half_line_capacity(const MeasureModel& model, double x) {
  if (!std::isfinite(x)) throw DomainError("half_line_capacity: x must be finite");
  if (x == model.median()) {
    throw DomainError("half_line_capacity: x must differ from the median");
  }
  const double li = log_inverse_density_integral(model, x);
  if (!std::isfinite(li) || li > 709.0) return {0.0, true};
  return {std::exp(-li), false};
}

// ---------------------------------------------------------------------------
// Criterion constants

struct CriterionSup {
  double value = 0.0;       // estimate at the finest stable grid (or N)
  double tail_mass = 0.0;   // argmax, in tail-mass coordinates
  double value_n = 0.0;     // grid N
  double value_2n = 0.0;    // grid 2N
  double value_4n = 0.0;    // grid 4N
  bool stable = false;      // |v(2N) - v(N)| < 1% of v(N)
  bool divergent = false;   // v(4N) > 10 v(N): reported as +inf
};

struct CriterionConstants {
  CriterionSup b_minus, b_plus, B_minus, B_plus;
  double lower_C = 0.0;  // max(b-, b+) / 4
  double upper_C = 0.0;  // 12 max(B-, B+)
  std::size_t grid = 0;
  bool finite() const {
    return !(b_minus.divergent || b_plus.divergent || B_minus.divergent ||
             B_plus.divergent);
  }
  bool stable() const {
    return b_minus.stable && b_plus.stable && B_minus.stable && B_plus.stable;
  }
};

struct CriterionOptions {
  std::size_t grid = 256;
  // Tail masses searched are (1/2) 10^{-grid/points_per_decade} .. 1/2, so the
  // range widens as the grid is refined.
  double points_per_decade = 16.0;
  double min_tail_mass = 1e-290;
};

namespace detail {

inline double criterion_term(const MeasureModel& model, const BetaFunction& beta,
                             Side side, double tau, double beta_divisor) {
  const double x = side == Side::Upper ? model.upper_quantile(tau)
                                       : model.lower_quantile(tau);
  if (x == model.median()) return 0.0;
  const double li = log_inverse_density_integral(model, x);
  return std::exp(std::log(tau) + li) / beta.eval(tau / beta_divisor);
}

inline double criterion_sup_at(const MeasureModel& model, const BetaFunction& beta,
                               Side side, double beta_divisor, std::size_t grid,
                               const CriterionOptions& opts, double* argmax) {
  const double lo = std::max(
      opts.min_tail_mass,
      0.5 * std::pow(10.0, -static_cast<double>(grid) / opts.points_per_decade));
  auto f = [&](double tau) {
    return criterion_term(model, beta, side, tau, beta_divisor);
  };
  const SupSearchResult r = sup_search(f, lo, 0.5, grid, GridSpacing::Logarithmic);
  if (argmax) *argmax = r.argmax;
  return r.max_value;
}

inline CriterionSup criterion_sup(const MeasureModel& model, const BetaFunction& beta,
                                  Side side, double beta_divisor,
                                  const CriterionOptions& opts) {
  CriterionSup s;
  double arg = 0.0;
  s.value_n = criterion_sup_at(model, beta, side, beta_divisor, opts.grid, opts, &arg);
  s.value_2n = criterion_sup_at(model, beta, side, beta_divisor, 2 * opts.grid, opts,
                                &s.tail_mass);
  s.value_4n =
      criterion_sup_at(model, beta, side, beta_divisor, 4 * opts.grid, opts, nullptr);
  s.stable = std::abs(s.value_2n - s.value_n) < 0.01 * s.value_n;
  s.divergent = !std::isfinite(s.value_4n) || s.value_4n > 10.0 * s.value_n;
  s.value = s.divergent ? kInf : s.value_2n;
  return s;
}

}  // namespace detail

/// The four suprema b-, b+, B-, B+ with tail masses tau:
///   b = sup tau / beta(tau / 4) * int_m^x 1/rho,  B = sup tau / beta(tau) * ...
/// searched on logarithmic tail-mass grids of size N, 2N and 4N.
inline CriterionConstants compute_criterion_constants(const MeasureModel& model,
                                                      const BetaFunction& beta,
                                                      const CriterionOptions& opts = {}) {
  CriterionConstants c;
  c.grid = opts.grid;
  c.b_plus = detail::criterion_sup(model, beta, Side::Upper, 4.0, opts);
  c.b_minus = detail::criterion_sup(model, beta, Side::Lower, 4.0, opts);
  c.B_plus = detail::criterion_sup(model, beta, Side::Upper, 1.0, opts);
  c.B_minus = detail::criterion_sup(model, beta, Side::Lower, 1.0, opts);
  c.lower_C = 0.25 * std::max(c.b_minus.value, c.b_plus.value);
  c.upper_C = 12.0 * std::max(c.B_minus.value, c.B_plus.value);
  return c;
}

// ---------------------------------------------------------------------------

/// beta~(a) = sup_{0 < s < a/2} (a/2 - s) / beta(s).
inline double beta_tilde(const BetaFunction& beta, double a, std::size_t grid = 256) {
  if (!(a > 0.0 && a < 0.5)) throw DomainError("beta_tilde: need 0 < a < 1/2");
  const double h = 0.5 * a;
  auto f = [&](double s) { return (h - s) / beta.eval(s); };
  const SupSearchResult r = sup_search(f, 1e-12 * h, h, grid, GridSpacing::Logarithmic);
  return std::max(r.max_value, f(0.5 * h));
}

struct CapacityRow {
  Side side = Side::Upper;
  double tail_mass = 0.0;
  double x = 0.0;
  double capacity = 0.0;
  double ratio = 0.0;  // capa * 4 beta(tau/4) / tau
};

struct CapacityLowerBoundReport {
  std::vector<CapacityRow> rows;
  double min_ratio = kInf;
  double min_ratio_upper = kInf;
  double min_ratio_lower = kInf;
  double min_ratio_doubled = kInf;  // same quantity on a grid of twice the size
  bool stable = false;              // relative change under doubling < 1%
};

namespace detail {

inline void capacity_ratio_grid(const MeasureModel& model, const BetaFunction& beta,
                                std::size_t grid, double tau_min,
                                CapacityLowerBoundReport& rep, bool keep_rows) {
  const double lo = std::log(tau_min);
  const double hi = std::log(0.5);
  for (Side side : {Side::Upper, Side::Lower}) {
    double best = kInf;
    for (std::size_t i = 0; i < grid; ++i) {
      const double tau = std::exp(lo + (hi - lo) * static_cast<double>(i) /
                                           static_cast<double>(grid));
      const double x = side == Side::Upper ? model.upper_quantile(tau)
                                           : model.lower_quantile(tau);
      const HalfLineCapacity cap = half_line_capacity(model, x);
      const double ratio = cap.value * 4.0 * beta.eval(0.25 * tau) / tau;
      best = std::min(best, ratio);
      if (keep_rows) rep.rows.push_back({side, tau, x, cap.value, ratio});
    }
    if (keep_rows) {
      (side == Side::Upper ? rep.min_ratio_upper : rep.min_ratio_lower) = best;
    } else {
      rep.min_ratio_doubled = std::min(rep.min_ratio_doubled, best);
    }
  }
}

}  // namespace detail

/// min over half-lines A with mu(A) in [tau_min, 1/2) of
/// capa(A) * 4 beta(mu(A)/4) / mu(A). A WP inequality with C beta forces
/// this to be at least 1/C.
inline CapacityLowerBoundReport check_capacity_lower_bound(const MeasureModel& model,
                                                           const BetaFunction& beta,
                                                           std::size_t grid = 256,
                                                           double tau_min = 1e-12) {
  if (grid == 0) throw DomainError("check_capacity_lower_bound: grid must be positive");
  if (!(tau_min > 0.0 && tau_min < 0.5)) {
    throw DomainError("check_capacity_lower_bound: need 0 < tau_min < 1/2");
  }
  CapacityLowerBoundReport rep;
  detail::capacity_ratio_grid(model, beta, grid, tau_min, rep, true);
  detail::capacity_ratio_grid(model, beta, 2 * grid, tau_min, rep, false);
  rep.min_ratio = std::min(rep.min_ratio_upper, rep.min_ratio_lower);
  rep.stable = std::abs(rep.min_ratio_doubled - rep.min_ratio) < 0.01 * rep.min_ratio;
  return rep;
}

// ---------------------------------------------------------------------------

struct CorollaryReport {
  bool admissible = false;
  double c_estimate = 0.0;
  double interval_bound = kInf;  // conditions hold on the grid from here to x_max
  bool phi_prime_vanishes = false;
  double max_curvature = 0.0;  // max |Phi''|/Phi'^2 over [interval_bound, x_max]
  std::string reason;
};

/// Sufficient condition for WP with a multiple of beta, on the right half-line
/// (the left one is its mirror for even measures). On a logarithmic grid of
/// (max(x_smooth, x_max 1e-6), x_max) it finds the smallest x from which
///   Phi' > 0,  |Phi''|/Phi'^2 <= 1 - eps  and  rho/(eps Phi') < 1/2
/// all hold, and reports c = inf beta(rho/(eps Phi')) Phi'^2 beyond it.
/// `density` is the normalised density exp(-Phi)/Z.
inline CorollaryReport check_corollary_wp(const PotentialSpec& spec,
                                          const std::function<double(double)>& density,
                                          double eps, const BetaFunction& beta,
                                          double x_max, std::size_t grid = 512) {
  if (!(eps > 0.0 && eps < 1.0)) throw DomainError("check_corollary_wp: need 0 < eps < 1");
  if (!(x_max > spec.x_smooth)) {
    throw DomainError("check_corollary_wp: need x_max > x_smooth");
  }
  if (grid < 2) throw DomainError("check_corollary_wp: grid must be >= 2");
  const double x_lo = std::max(spec.x_smooth, 1e-6 * x_max);
  std::vector<double> xs(grid);
  for (std::size_t i = 0; i < grid; ++i) {
    xs[i] = x_lo * std::pow(x_max / x_lo, static_cast<double>(i + 1) /
                                              static_cast<double>(grid));
  }
  CorollaryReport rep;
  // Walk down from x_max while every condition holds.
  std::size_t first = grid;
  for (std::size_t k = grid; k-- > 0;) {
    const double x = xs[k];
    const double d = spec.phi_prime(x);
    if (!(d > 0.0)) {
      rep.phi_prime_vanishes = true;
      break;
    }
    const double curv = std::abs(spec.phi_second(x)) / (d * d);
    const double arg = density(x) / (eps * d);
    if (!(curv <= 1.0 - eps) || !(arg < 0.5)) break;
    first = k;
  }
  if (first == grid) {
    rep.reason = rep.phi_prime_vanishes ? "Phi' vanishes at x_max"
                                        : "curvature condition fails at x_max";
    return rep;
  }
  rep.interval_bound = xs[first];
  double c = kInf;
  for (std::size_t k = first; k < grid; ++k) {
    const double x = xs[k];
    const double d = spec.phi_prime(x);
    const double arg = density(x) / (eps * d);
    rep.max_curvature = std::max(rep.max_curvature, std::abs(spec.phi_second(x)) / (d * d));
    if (!(arg > 0.0)) continue;  // density underflow: beyond the reach of the grid
    c = std::min(c, beta.eval(arg) * d * d);
  }
  rep.c_estimate = std::isfinite(c) ? c : 0.0;
  rep.admissible = rep.c_estimate > 0.0;
  if (!rep.admissible) rep.reason = "c estimate is zero";
  return rep;
}

inline CorollaryReport check_corollary_wp(const MeasureModel& model, double eps,
                                          const BetaFunction& beta, double x_max,
                                          std::size_t grid = 512) {
  return check_corollary_wp(model.potential(),
                            [&](double x) { return model.density(x); }, eps, beta, x_max,
                            grid);
}

}  // namespace heavyconc

#pragma once

// Deviation bounds for Lipschitz functions on products: the recursion, its
// closed form, Theta, the family-specific tail bounds, the Wang-Zhang
// variant, Hypothesis (H) and the exact product-set curve for power laws.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "heavyconc/beta.hpp"
#include "heavyconc/errors.hpp"
#include "heavyconc/format.hpp"
#include "heavyconc/numerics.hpp"
#include "heavyconc/potential.hpp"

namespace heavyconc {

enum class TailRoute {
  Recursion,
  ClosedForm,
  Theta,
  MAlpha,
  NuP,
  PhiBound,
  WangZhang,
  ProductSetExact,
};

inline const char* to_string(TailRoute r) {
  switch (r) {
    case TailRoute::Recursion: return "Recursion";
    case TailRoute::ClosedForm: return "ClosedForm";
    case TailRoute::Theta: return "Theta";
    case TailRoute::MAlpha: return "MAlpha";
    case TailRoute::NuP: return "NuP";
    case TailRoute::PhiBound: return "PhiBound";
    case TailRoute::WangZhang: return "WangZhang";
    case TailRoute::ProductSetExact: return "ProductSetExact";
  }
  return "?";
}

inline TailRoute parse_tail_route(std::string_view name) {
  for (TailRoute r : {TailRoute::Recursion, TailRoute::ClosedForm, TailRoute::Theta,
                      TailRoute::MAlpha, TailRoute::NuP, TailRoute::PhiBound,
                      TailRoute::WangZhang, TailRoute::ProductSetExact}) {
    if (name == to_string(r)) return r;
  }
  throw ParseError("unknown route '" + std::string(name) + "'");
}

struct TailValue {
  double value = 1.0;
  bool vacuous = false;  // outside the range where the route says anything
};

/// A deviation bound k -> bound on mu^n(F - m > k) (one-sided routes) or
/// mu^n(|F - m| > k) (two-sided ones) for L-Lipschitz F.
struct TailBound {
  std::uint64_t n = 1;
  double L = 1.0;
  TailRoute route = TailRoute::ClosedForm;
  bool two_sided = false;
  std::string label;
  std::function<TailValue(double)> fn;

  TailValue evaluate(double k) const {
    if (!(k >= 0.0)) throw DomainError("TailBound: need k >= 0");
    TailValue v = fn(k);
    if (std::isnan(v.value) || v.value >= 1.0) {
      v.value = 1.0;
    } else if (v.value < 0.0) {
      v.value = 0.0;
    }
    return v;
  }
  double eval(double k) const { return evaluate(k).value; }
};

namespace detail {

inline const double kHalfSqrtE = 0.5 * std::exp(0.5);

inline void check_L(double L, const char* what) {
  if (!(L > 0.0) || !std::isfinite(L)) throw DomainError(std::string(what) + ": need L > 0");
}

inline void check_s(double s, const char* what) {
  if (!(s > 0.0 && s < 0.25)) throw DomainError(std::string(what) + ": need 0 < s < 1/4");
}

/// Fixed logarithmic grid on [1e-300, 1/4) used for every inf over s. Each
/// grid value is itself a valid bound, so the minimum is an honest bound and,
/// the grid being fixed, exactly monotone in k and n.
inline const std::vector<double>& s_grid() {
  static const std::vector<double> grid = [] {
    constexpr int kPoints = 1 << 14;
    std::vector<double> g(kPoints);
    const double lo = std::log(1e-300);
    const double hi = std::log(0.25);
    for (int i = 0; i < kPoints; ++i) g[i] = std::exp(lo + (hi - lo) * i / kPoints);
    return g;
  }();
  return grid;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Recursion and closed form.

/// u_0 = 1/2, u_j = s/(1 + L^2 beta(s)) + u_{j-1} (1 - 1/(2(1 + L^2 beta(s)))).
inline double iterate_recursion(const BetaFunction& beta, double L, double s,
                                std::uint64_t k) {
  detail::check_L(L, "iterate_recursion");
  detail::check_s(s, "iterate_recursion");
  const double d = 1.0 + L * L * beta.eval(s);
  const double add = s / d;
  const double mul = 1.0 - 0.5 / d;
  double u = 0.5;
  for (std::uint64_t j = 0; j < k; ++j) u = add + u * mul;
  return u;
}

/// Same recursion with a per-step s_j; steps.size() is the number of steps.
inline double iterate_recursion_schedule(const BetaFunction& beta, double L,
                                         const std::vector<double>& steps) {
  detail::check_L(L, "iterate_recursion_schedule");
  double u = 0.5;
  for (double s : steps) {
    detail::check_s(s, "iterate_recursion_schedule");
    const double d = 1.0 + L * L * beta.eval(s);
    u = s / d + u * (1.0 - 0.5 / d);
  }
  return u;
}

/// 2s + 1/2 exp(-k / (2(1 + L^2 beta(s)))), the summed upper estimate.
inline double recursion_summed_bound(const BetaFunction& beta, double L, double s,
                                     double k) {
  detail::check_L(L, "recursion_summed_bound");
  detail::check_s(s, "recursion_summed_bound");
  return 2.0 * s + 0.5 * std::exp(-k / (2.0 * (1.0 + L * L * beta.eval(s))));
}

/// min(1, 2s + (sqrt(e)/2) exp(-k / (4 L sqrt(beta(s))))).
inline double deviation_bound(const BetaFunction& beta, double L, double s, double k) {
  detail::check_L(L, "deviation_bound");
  detail::check_s(s, "deviation_bound");
  if (!(k >= 0.0)) throw DomainError("deviation_bound: need k >= 0");
  const double v =
      2.0 * s + detail::kHalfSqrtE * std::exp(-(k / L) / (4.0 * std::sqrt(beta.eval(s))));
  return std::min(1.0, v);
}

struct OptimizedBound {
  double value = 1.0;
  double s = 0.25;
};

/// inf over s of deviation_bound, on the fixed s grid.
inline OptimizedBound optimize_deviation(const BetaFunction& beta, double L, double k) {
  detail::check_L(L, "optimize_deviation");
  OptimizedBound best;
  best.value = kInf;
  const double u = k / L;
  for (double s : detail::s_grid()) {
    const double v =
        2.0 * s + detail::kHalfSqrtE * std::exp(-u / (4.0 * std::sqrt(beta.eval(s))));
    if (v < best.value) best = {v, s};
  }
  best.value = std::min(1.0, best.value);
  return best;
}

/// inf over s of the k-step recursion value, via its exact solution
/// u_k = 2s + (1/2 - 2s) (1 - 1/(2(1 + L^2 beta(s))))^k.
inline OptimizedBound optimize_recursion(const BetaFunction& beta, double L,
                                         std::uint64_t k) {
  detail::check_L(L, "optimize_recursion");
  OptimizedBound best;
  best.value = kInf;
  const double kk = static_cast<double>(k);
  for (double s : detail::s_grid()) {
    const double d = 1.0 + L * L * beta.eval(s);
    const double v = 2.0 * s + (0.5 - 2.0 * s) * std::exp(kk * std::log1p(-0.5 / d));
    if (v < best.value) best = {v, s};
  }
  return best;
}

// ---------------------------------------------------------------------------
// Theta.

struct ThetaResult {
  double value = 0.25;
  bool vacuous = false;  // condition fails on all of (0, 1/4]
};

/// Theta(u) = inf{s in (0, 1/4] : exp(-u / (4 sqrt(beta(s)))) <= s}, by
/// bisection in log s. beta is evaluated at 1/4 as its left limit.
inline ThetaResult theta_detail(const BetaFunction& beta, double u) {
  if (!(u > 0.0)) throw DomainError("theta: need u > 0");
  auto g = [&](double v) {
    const double s = std::exp(v);
    return std::exp(-u / (4.0 * std::sqrt(beta.eval(s)))) - s;
  };
  const double lo = std::log(1e-300);
  const double hi = std::log(0.25);
  if (g(hi) > 0.0) return {0.25, true};
  if (g(lo) <= 0.0) return {1e-300, false};
  return {std::min(0.25, std::exp(find_root_monotone(g, lo, hi, 1e-13))), false};
}

inline double theta(const BetaFunction& beta, double u) { return theta_detail(beta, u).value; }

// ---------------------------------------------------------------------------
// Wang-Zhang.

/// Largest q in (0, 1/2) compatible with
/// (1/2 - c)^2 (k/L)^2 / 4 <= [log(1/(2q)) + 1/2 - c] int_q^{1/2} beta(c s)/s ds,
/// i.e. the implied bound on mu(F - m > k). The integral is taken in u = log s.
inline double wang_zhang_bound(const BetaFunction& beta, double c, double k, double L = 1.0) {
  if (!(c > 0.0 && c < 0.5)) throw DomainError("wang_zhang_bound: need 0 < c < 1/2");
  if (!(k > 0.0)) throw DomainError("wang_zhang_bound: need k > 0");
  detail::check_L(L, "wang_zhang_bound");
  const double kl = k / L;
  const double lhs = (0.5 - c) * (0.5 - c) * kl * kl / 4.0;
  if (!(lhs > 0.0)) return 0.5;
  const double top = std::log(0.5);
  QuadratureOptions opts;
  opts.abs_tol = 0.0;
  opts.rel_tol = 1e-12;
  // y = log(1/(2q)); G is increasing in y and G(0) = -lhs. The integrand
  // grows toward the lower end, so its last unit interval alone bounds the
  // integral from below; that settles the sign where quadrature would overflow.
  auto G = [&](double y) {
    if (y >= 1.0 && (y + 0.5 - c) * beta.eval(c * std::exp(top - y + 1.0)) >= lhs) {
      return 1.0;
    }
    auto g = [&](double u) { return beta.eval(c * std::exp(u)); };
    double integral = 0.0;
    try {
      integral = integrate(g, top - y, top, opts).value;
    } catch (const ConvergenceError& e) {
      integral = e.best_estimate().value;
    }
    return (y + 0.5 - c) * integral - lhs;
  };
  constexpr double kYmax = 700.0;
  if (G(kYmax) < 0.0) return 0.5 * std::exp(-kYmax);
  const double y = find_root_monotone(G, 0.0, kYmax, 1e-10);
  return 0.5 * std::exp(-y);
}

/// min over c in {0.01, ..., 0.49} of wang_zhang_bound.
inline OptimizedBound optimize_wang_zhang(const BetaFunction& beta, double k, double L = 1.0) {
  OptimizedBound best;
  best.value = 0.5;
  best.s = 0.25;
  for (int i = 1; i < 50; ++i) {
    const double c = 0.01 * i;
    const double q = wang_zhang_bound(beta, c, k, L);
    if (q < best.value) best = {q, c};
  }
  return best;
}

// ---------------------------------------------------------------------------
// m_alpha.

/// t0(alpha): smallest t > e with (alpha log t / t)^alpha < 1/4.
inline double malpha_threshold(double alpha) {
  if (!(alpha > 0.0)) throw DomainError("malpha_threshold: need alpha > 0");
  const double target = std::pow(0.25, 1.0 / alpha);
  auto h = [&](double t) { return alpha * std::log(t) / t - target; };
  const double e = std::exp(1.0);
  if (h(e) <= 0.0) return e;
  const double hi = expand_upper_bracket(h, e, 2.0 * e);
  return find_root_monotone(h, e, hi, 1e-12 * hi);
}

/// scale_constant (log t / t)^alpha: the bound on m_alpha^n(|F - m| > t n^{1/alpha}).
inline double tail_bound_malpha(double alpha, std::uint64_t n, double t,
                                double scale_constant) {
  if (n == 0) throw DomainError("tail_bound_malpha: need n >= 1");
  if (!(scale_constant > 0.0)) throw DomainError("tail_bound_malpha: need C > 0");
  const double t0 = malpha_threshold(alpha);
  if (!(t >= t0)) {
    throw DomainError("tail_bound_malpha: t = " + format_double(t) +
                      " is below t0(alpha) = " + format_double(t0));
  }
  return scale_constant * std::pow(std::log(t) / t, alpha);
}

/// 2 (alpha log t / t)^alpha + t^{-alpha}: the value the argument reaches with
/// s = (alpha log t / t)^alpha.
inline double malpha_proof_value(double alpha, double t) {
  return 2.0 * std::pow(alpha * std::log(t) / t, alpha) + std::pow(t, -alpha);
}

/// inf_s 2s + (sqrt(e)/2) exp(-k s^{1/alpha} / (4 sqrt(c_alpha) n^{1/alpha})),
/// i.e. the closed form for beta = c_alpha (s/n)^{-2/alpha}.
inline OptimizedBound malpha_direct_optimization(double alpha, std::uint64_t n, double k,
                                                 double c_alpha) {
  if (!(alpha > 0.0) || n == 0 || !(c_alpha > 0.0)) {
    throw DomainError("malpha_direct_optimization: bad arguments");
  }
  const double t = k / (4.0 * std::sqrt(c_alpha) *
                        std::pow(static_cast<double>(n), 1.0 / alpha));
  OptimizedBound best;
  best.value = kInf;
  for (double s : detail::s_grid()) {
    const double v = 2.0 * s + detail::kHalfSqrtE * std::exp(-t * std::pow(s, 1.0 / alpha));
    if (v < best.value) best = {v, s};
  }
  return best;
}

// ---------------------------------------------------------------------------
// Exact product-set enlargement for m_alpha.

namespace detail {

// log R(x) for the m_alpha CDF R.
inline double malpha_log_cdf(double alpha, double x) {
  if (x >= 0.0) return std::log1p(-0.5 * std::pow(1.0 + x, -alpha));
  return std::log(0.5) - alpha * std::log1p(-x);
}

// R^{-1}(exp(log_r)).
inline double malpha_quantile_log(double alpha, double log_r) {
  const double r = std::exp(log_r);
  if (r <= 0.5) return 1.0 - std::pow(2.0 * r, -1.0 / alpha);
  const double upper = -std::expm1(log_r);  // 1 - r
  return std::pow(2.0 * upper, -1.0 / alpha) - 1.0;
}

inline double product_set_log(double alpha, std::uint64_t n, double a, double h) {
  if (!(alpha > 0.0) || n == 0) throw DomainError("product_set_enlargement: bad alpha or n");
  if (!(a > 0.0 && a < 1.0)) throw DomainError("product_set_enlargement: need 0 < a < 1");
  if (!(h >= 0.0)) throw DomainError("product_set_enlargement: need h >= 0");
  const double nn = static_cast<double>(n);
  const double x0 = malpha_quantile_log(alpha, std::log(a) / nn);
  return nn * malpha_log_cdf(alpha, x0 + h);
}

}  // namespace detail

/// R(R^{-1}(a^{1/n}) + h)^n: the measure of the box enlargement of the
/// product set (-inf, R^{-1}(a^{1/n})]^n.
inline double product_set_enlargement_exact(double alpha, std::uint64_t n, double a,
                                            double h) {
  const double lg = detail::product_set_log(alpha, n, a, h);
  if (h == 0.0) return a;
  return std::exp(lg);
}

/// 1 - product_set_enlargement_exact, without cancellation.
inline double product_set_enlargement_complement(double alpha, std::uint64_t n, double a,
                                                 double h) {
  const double lg = detail::product_set_log(alpha, n, a, h);
  if (h == 0.0) return 1.0 - a;
  return -std::expm1(lg);
}

/// Envelope constants for the sandwich
/// 1 - C (log t/t)^alpha <= R(R^{-1}(a^{1/n}) + t n^{1/alpha})^n <= 1 - c / t^alpha
/// on [t2, t_max], fitted on `grid` logarithmic points with a relative slack.
struct ProductSetConstants {
  double C = 0.0;
  double c = 0.0;
  double t2 = 0.0;
  double t_max = 0.0;
};

inline ProductSetConstants calibrate_product_set_constants(double alpha, std::uint64_t n,
                                                           double a, double t_max,
                                                           std::size_t grid = 16,
                                                           double slack = 0.05) {
  ProductSetConstants pc;
  pc.t2 = malpha_threshold(alpha);
  pc.t_max = t_max;
  if (!(t_max > pc.t2) || grid < 2) {
    throw DomainError("calibrate_product_set_constants: need t_max > t2 and grid >= 2");
  }
  const double root = std::pow(static_cast<double>(n), 1.0 / alpha);
  double hi = 0.0;
  double lo = kInf;
  for (std::size_t i = 0; i < grid; ++i) {
    const double t = pc.t2 * std::pow(t_max / pc.t2, static_cast<double>(i) / (grid - 1));
    const double miss = product_set_enlargement_complement(alpha, n, a, t * root);
    hi = std::max(hi, miss / std::pow(std::log(t) / t, alpha));
    lo = std::min(lo, miss * std::pow(t, alpha));
  }
  pc.C = hi * (1.0 + slack);
  pc.c = lo / (1.0 + slack);
  return pc;
}

// ---------------------------------------------------------------------------
// nu_p.

struct NuPBound {
  double value = 1.0;    // 10 exp(-c_p k / max(k^p, log n)^{1/p - 1}), or 1
  bool vacuous = false;  // the construction's s is >= 1/4
  int regime = 0;        // 1: k >= (log n)^{1/p}; 2: otherwise
  double s = 0.0;        // 2 e^{-k^p} or 2 e^{-k (log n)^{1 - 1/p}}
};

inline NuPBound tail_bound_nup_detail(double p, std::uint64_t n, double k, double c_p) {
  if (!(p > 0.0 && p < 1.0)) throw DomainError("tail_bound_nup: need 0 < p < 1");
  if (n == 0) throw DomainError("tail_bound_nup: need n >= 1");
  if (!(k > 0.0)) throw DomainError("tail_bound_nup: need k > 0");
  if (!(c_p > 0.0)) throw DomainError("tail_bound_nup: need c_p > 0");
  const double logn = std::log(static_cast<double>(n));
  NuPBound b;
  const double kp = std::pow(k, p);
  if (kp >= logn) {
    b.regime = 1;
    b.s = 2.0 * std::exp(-kp);
  } else {
    b.regime = 2;
    b.s = 2.0 * std::exp(-k * std::pow(logn, 1.0 - 1.0 / p));
  }
  if (!(b.s < 0.25)) {
    b.vacuous = true;
    b.value = 1.0;
    return b;
  }
  b.value = 10.0 * std::exp(-c_p * k / std::pow(std::max(kp, logn), 1.0 / p - 1.0));
  return b;
}

inline double tail_bound_nup(double p, std::uint64_t n, double k, double c_p) {
  return tail_bound_nup_detail(p, n, k, c_p).value;
}

/// Smallest k with tail_bound_nup <= eps (eps < 1), by bisection.
inline double nup_k_for_epsilon(double p, std::uint64_t n, double eps, double c_p) {
  if (!(eps > 0.0 && eps < 1.0)) throw DomainError("nup_k_for_epsilon: need 0 < eps < 1");
  auto f = [&](double k) {
    const NuPBound b = tail_bound_nup_detail(p, n, k, c_p);
    return (b.vacuous ? 1.0 : b.value) - eps;
  };
  const double hi = expand_upper_bracket(f, 1e-9, 1.0);
  return find_root_monotone(f, 1e-9, hi, 1e-12 * hi);
}

// ---------------------------------------------------------------------------
// Hypothesis (H).

struct HWitness {
  std::string check;
  double x = 0.0;
  double lhs = 0.0;
  double rhs = 0.0;
};

struct HypothesisReport {
  bool passes = false;
  double B_estimate = 0.0;  // inf Phi(2x)/Phi(x) over the grid
  double C_estimate = 0.0;  // sup |x Phi''(x)| / Phi'(x) over the grid
  bool doubling = false;    // B_estimate > 1 + margin
  bool curvature_finite = false;
  bool concave = false;     // Phi' non-increasing on the grid
  bool chain_holds = false; // (B-1)Phi <= Phi(2x)-Phi(x) <= x Phi' <= Phi
  double B_prime = kInf;    // 2^{1 + log 2 / log B}
  double B_second = 0.0;    // 2 (B - 1) / B'
  bool eq2_holds = false;   // Phi(B'x) >= 2 Phi(x)
  bool eq3_holds = false;   // Phi'(x) >= Phi'(B'x) >= B'' Phi'(x)
  // Smallest grid x from which every check above, plus Phi' > 0,
  // |Phi''|/Phi'^2 <= 1/2 and log(1/2) + log Phi' + Phi >= Phi/2, holds on
  // the rest of the grid; +inf when some check fails at the top.
  double threshold = kInf;
  double x_lo = 0.0;
  double x_hi = 0.0;
  std::vector<HWitness> witnesses;  // failing grid points, at most 64
};

inline HypothesisReport check_hypothesis_H(const PotentialSpec& spec, double x_lo,
                                           double x_hi, std::size_t grid = 512,
                                           double margin = 1e-2) {
  if (!(x_lo > 0.0 && x_hi > x_lo) || grid < 2) {
    throw DomainError("check_hypothesis_H: need 0 < x_lo < x_hi and grid >= 2");
  }
  HypothesisReport rep;
  rep.x_lo = x_lo;
  rep.x_hi = x_hi;
  std::vector<double> xs(grid);
  for (std::size_t i = 0; i < grid; ++i) {
    xs[i] = x_lo * std::pow(x_hi / x_lo, static_cast<double>(i) / (grid - 1));
  }
  constexpr double kRel = 1e-9;
  auto le = [](double a, double b) { return a <= b + kRel * std::abs(b) + 1e-300; };

  rep.B_estimate = kInf;
  rep.C_estimate = 0.0;
  bool c_finite = true;
  for (double x : xs) {
    rep.B_estimate = std::min(rep.B_estimate, spec.phi(2.0 * x) / spec.phi(x));
    const double d1 = spec.phi_prime(x);
    const double d2 = spec.phi_second(x);
    if (!std::isnormal(d1) || (d2 != 0.0 && !std::isnormal(d2))) continue;
    const double r = std::abs(x * d2) / d1;
    if (!std::isfinite(r)) c_finite = false;
    rep.C_estimate = std::max(rep.C_estimate, r);
  }
  rep.doubling = rep.B_estimate > 1.0 + margin;
  rep.curvature_finite = c_finite && std::isfinite(rep.C_estimate);
  const double B = rep.B_estimate;
  if (B > 1.0) {
    rep.B_prime = std::pow(2.0, 1.0 + std::log(2.0) / std::log(B));
    rep.B_second = 2.0 * (B - 1.0) / rep.B_prime;
  }

  std::vector<std::vector<bool>> ok;
  auto witness = [&](const std::string& name, double x, double lhs, double rhs) {
    if (rep.witnesses.size() < 64) rep.witnesses.push_back({name, x, lhs, rhs});
  };
  auto run = [&](const std::string& name, auto check) {
    std::vector<bool> v(grid);
    bool all = true;
    for (std::size_t i = 0; i < grid; ++i) {
      const auto [lhs, rhs] = check(i);
      v[i] = le(lhs, rhs);
      if (!v[i]) {
        all = false;
        witness(name, xs[i], lhs, rhs);
      }
    }
    ok.push_back(std::move(v));
    return all;
  };
  const auto& f = spec.phi;
  const auto& fp = spec.phi_prime;
  rep.concave = run("concavity", [&](std::size_t i) {
    const double next = i + 1 < grid ? fp(xs[i + 1]) : fp(xs[i]);
    return std::pair{next, fp(xs[i])};
  });
  const bool c1 = run("chain:(B-1)Phi<=Phi(2x)-Phi(x)", [&](std::size_t i) {
    const double x = xs[i];
    return std::pair{(B - 1.0) * f(x), f(2.0 * x) - f(x)};
  });
  const bool c2 = run("chain:Phi(2x)-Phi(x)<=xPhi'", [&](std::size_t i) {
    const double x = xs[i];
    return std::pair{f(2.0 * x) - f(x), x * fp(x)};
  });
  const bool c3 = run("chain:xPhi'<=Phi", [&](std::size_t i) {
    const double x = xs[i];
    return std::pair{x * fp(x), f(x)};
  });
  rep.chain_holds = c1 && c2 && c3;
  if (B > 1.0) {
    rep.eq2_holds = run("eq2:2Phi(x)<=Phi(B'x)", [&](std::size_t i) {
      const double x = xs[i];
      return std::pair{2.0 * f(x), f(rep.B_prime * x)};
    });
    const bool e3a = run("eq3:Phi'(B'x)<=Phi'(x)", [&](std::size_t i) {
      const double x = xs[i];
      return std::pair{fp(rep.B_prime * x), fp(x)};
    });
    const bool e3b = run("eq3:B''Phi'(x)<=Phi'(B'x)", [&](std::size_t i) {
      const double x = xs[i];
      return std::pair{rep.B_second * fp(x), fp(rep.B_prime * x)};
    });
    rep.eq3_holds = e3a && e3b;
  }
  run("Phi'>0", [&](std::size_t i) { return std::pair{0.0, fp(xs[i]) > 0.0 ? 1.0 : -1.0}; });
  run("|Phi''|/Phi'^2<=1/2", [&](std::size_t i) {
    const double d = fp(xs[i]);
    return std::pair{std::abs(spec.phi_second(xs[i])) / (d * d), 0.5};
  });
  run("log(1/2)+log Phi'+Phi>=Phi/2", [&](std::size_t i) {
    const double x = xs[i];
    return std::pair{0.5 * f(x), std::log(0.5) + std::log(fp(x)) + f(x)};
  });
  if (B > 1.0) {
    std::size_t start = 0;
    for (const auto& v : ok) {
      std::size_t first = grid;
      for (std::size_t i = grid; i-- > 0;) {
        if (!v[i]) break;
        first = i;
      }
      start = std::max(start, first);
    }
    rep.threshold = start < grid ? std::max(xs[start], spec.x_smooth) : kInf;
  }
  rep.passes = rep.doubling && rep.curvature_finite && rep.concave;
  return rep;
}

/// Default range [max(10, 2 x_smooth), 1e200] with 512 points: wide enough
/// that slowly varying potentials show B -> 1.
inline HypothesisReport check_hypothesis_H(const PotentialSpec& spec) {
  return check_hypothesis_H(spec, std::max(10.0, 2.0 * spec.x_smooth), 1e200);
}

// ---------------------------------------------------------------------------
// Potentials under (H).

/// 6 exp(-c_phi k Phi'(Phi^{-1}(max(Phi(k), 2 log n)))) for k >= k_phi.
inline double tail_bound_phi(const PotentialSpec& spec, std::uint64_t n, double k,
                             double c_phi, double k_phi) {
  if (n == 0) throw DomainError("tail_bound_phi: need n >= 1");
  if (!(c_phi > 0.0)) throw DomainError("tail_bound_phi: need c_phi > 0");
  if (!(k >= k_phi)) {
    throw DomainError("tail_bound_phi: k = " + format_double(k) + " is below k_Phi = " +
                      format_double(k_phi));
  }
  const double y = std::max(spec.phi(k), 2.0 * std::log(static_cast<double>(n)));
  return 6.0 * std::exp(-c_phi * k * spec.phi_prime(spec.phi_inverse(y)));
}

/// 6 max(exp(-c_tilde Phi(k)), exp(-c_phi k Phi'(Phi^{-1}(2 log n)))); the
/// second factor is 1 for n = 1.
inline double tail_bound_phi_second(const PotentialSpec& spec, std::uint64_t n, double k,
                                    double c_phi, double c_tilde) {
  if (n == 0) throw DomainError("tail_bound_phi_second: need n >= 1");
  if (!(c_phi > 0.0) || !(c_tilde > 0.0)) {
    throw DomainError("tail_bound_phi_second: need positive constants");
  }
  const double a = std::exp(-c_tilde * spec.phi(k));
  const double logn2 = 2.0 * std::log(static_cast<double>(n));
  const double b =
      n == 1 ? 1.0 : std::exp(-c_phi * k * spec.phi_prime(spec.phi_inverse(logn2)));
  return 6.0 * std::max(a, b);
}

// ---------------------------------------------------------------------------
// Routes packaged as TailBound.

/// beta is the one-dimensional WP function (with its honest scale); routes
/// built from it use tensorise_beta(beta, n).
inline TailBound closed_form_route(const BetaFunction& beta, std::uint64_t n, double L = 1.0) {
  detail::check_L(L, "closed_form_route");
  const BetaFunction bn = tensorise_beta(beta, n);
  TailBound t{n, L, TailRoute::ClosedForm, false, "ClosedForm[" + bn.descriptor() + "]", {}};
  t.fn = [bn, L](double k) { return TailValue{optimize_deviation(bn, L, k).value, false}; };
  return t;
}

/// Integer-step recursion; a real k uses floor(k) steps.
inline TailBound recursion_route(const BetaFunction& beta, std::uint64_t n, double L = 1.0) {
  detail::check_L(L, "recursion_route");
  const BetaFunction bn = tensorise_beta(beta, n);
  TailBound t{n, L, TailRoute::Recursion, false, "Recursion[" + bn.descriptor() + "]", {}};
  t.fn = [bn, L](double k) {
    return TailValue{optimize_recursion(bn, L, static_cast<std::uint64_t>(std::floor(k))).value,
                     false};
  };
  return t;
}

/// 6 Theta(k/L), two-sided.
inline TailBound theta_route(const BetaFunction& beta, std::uint64_t n, double L = 1.0) {
  detail::check_L(L, "theta_route");
  const BetaFunction bn = tensorise_beta(beta, n);
  TailBound t{n, L, TailRoute::Theta, true, "Theta[" + bn.descriptor() + "]", {}};
  t.fn = [bn, L](double k) {
    if (k == 0.0) return TailValue{1.0, true};
    const ThetaResult r = theta_detail(bn, k / L);
    return TailValue{6.0 * r.value, r.vacuous};
  };
  return t;
}

inline TailBound wang_zhang_route(const BetaFunction& beta, std::uint64_t n, double L = 1.0) {
  detail::check_L(L, "wang_zhang_route");
  const BetaFunction bn = tensorise_beta(beta, n);
  TailBound t{n, L, TailRoute::WangZhang, false, "WangZhang[" + bn.descriptor() + "]", {}};
  t.fn = [bn, L](double k) {
    if (k == 0.0) return TailValue{1.0, true};
    const double q = optimize_wang_zhang(bn, k, L).value;
    return TailValue{q, q >= 0.5};
  };
  return t;
}

/// C (log t/t)^alpha at t = (k/L) / n^{1/alpha}; 1 below t0(alpha).
inline TailBound malpha_route(double alpha, std::uint64_t n, double C, double L = 1.0) {
  detail::check_L(L, "malpha_route");
  const double t0 = malpha_threshold(alpha);
  const double root = std::pow(static_cast<double>(n), 1.0 / alpha);
  TailBound t{n, L, TailRoute::MAlpha, true,
              "MAlpha[alpha=" + format_double(alpha) + ",C=" + format_double(C) + "]", {}};
  t.fn = [=](double k) {
    const double tt = (k / L) / root;
    if (!(tt >= t0)) return TailValue{1.0, true};
    return TailValue{tail_bound_malpha(alpha, n, tt, C), false};
  };
  return t;
}

inline TailBound nup_route(double p, std::uint64_t n, double c_p, double L = 1.0) {
  detail::check_L(L, "nup_route");
  TailBound t{n, L, TailRoute::NuP, true,
              "NuP[p=" + format_double(p) + ",c=" + format_double(c_p) + "]", {}};
  t.fn = [=](double k) {
    if (k == 0.0) return TailValue{1.0, true};
    const NuPBound b = tail_bound_nup_detail(p, n, k / L, c_p);
    return TailValue{b.value, b.vacuous};
  };
  return t;
}

inline TailBound phi_route(const PotentialSpec& spec, std::uint64_t n, double c_phi,
                           double k_phi, double L = 1.0) {
  detail::check_L(L, "phi_route");
  TailBound t{n, L, TailRoute::PhiBound, true,
              "PhiBound[" + spec.name + ",c=" + format_double(c_phi) + "]", {}};
  t.fn = [=](double k) {
    if (!(k / L >= k_phi)) return TailValue{1.0, true};
    return TailValue{tail_bound_phi(spec, n, k / L, c_phi, k_phi), false};
  };
  return t;
}

/// Exact tail 1 - R(R^{-1}(a^{1/n}) + k)^n of the 1-Lipschitz function
/// max_i (x_i - R^{-1}(a^{1/n}))_+ whose median is 0 when a = 1/2. A lower
/// curve for the concentration function, not an upper bound.
inline TailBound product_set_route(double alpha, std::uint64_t n, double a = 0.5) {
  TailBound t{n, 1.0, TailRoute::ProductSetExact, false,
              "ProductSetExact[alpha=" + format_double(alpha) + ",a=" + format_double(a) + "]",
              {}};
  t.fn = [=](double k) {
    return TailValue{product_set_enlargement_complement(alpha, n, a, k), false};
  };
  return t;
}

}  // namespace heavyconc

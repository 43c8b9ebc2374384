#pragma once

// Shared numerical kernels: adaptive quadrature on finite and infinite
// intervals, coarse-grid + golden-section supremum search, and bracketed
// monotone root finding.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <queue>
#include <sstream>
#include <string>
#include <vector>

#include "heavyconc/errors.hpp"

namespace heavyconc {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

using RealFunction = std::function<double(double)>;

struct QuadratureResult {
  double value = 0.0;
  double abs_error_estimate = 0.0;
  std::size_t evaluations = 0;
};

struct QuadratureOptions {
  double abs_tol = 1e-10;
  double rel_tol = 0.0;
  std::size_t max_evaluations = 1'000'000;
  // Known kinks or singularities; the range is split there first.
  std::vector<double> breakpoints;
};

/// Thrown when the evaluation budget is exhausted before the requested
/// tolerance is met. Carries the best estimate reached.
class ConvergenceError : public NumericalError {
 public:
  ConvergenceError(const std::string& what, QuadratureResult best)
      : NumericalError(what), best_(best) {}
  const QuadratureResult& best_estimate() const noexcept { return best_; }

 private:
  QuadratureResult best_;
};

namespace detail {

// Gauss-Kronrod 7/15 abscissae and weights (QUADPACK qk15).
inline constexpr std::array<double, 8> kXgk = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr std::array<double, 8> kWgk = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr std::array<double, 4> kWg = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Panel {
  double a;
  double b;
  double value;
  double error;
  bool operator<(const Panel& other) const { return error < other.error; }
};

template <class F>
Panel gauss_kronrod_15(const F& f, double a, double b) {
  const double center = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  const double fc = f(center);
  double kronrod = fc * kWgk[7];
  double gauss = fc * kWg[3];
  for (int j = 0; j < 7; ++j) {
    const double dx = half * kXgk[j];
    const double f1 = f(center - dx);
    const double f2 = f(center + dx);
    kronrod += kWgk[j] * (f1 + f2);
    if (j % 2 == 1) gauss += kWg[j / 2] * (f1 + f2);
  }
  kronrod *= half;
  gauss *= half;
  if (!std::isfinite(kronrod)) {
    std::ostringstream os;
    os << "integrand is not finite on [" << a << ", " << b << "]";
    throw NumericalError(os.str());
  }
  return {a, b, kronrod, std::abs(kronrod - gauss)};
}

template <class F>
QuadratureResult adaptive_finite(const F& f, double a, double b,
                                 const QuadratureOptions& opts) {
  QuadratureResult result;
  if (a == b) return result;
  const double sign = a < b ? 1.0 : -1.0;
  if (a > b) std::swap(a, b);

  std::priority_queue<Panel> work;
  std::vector<Panel> done;  // panels too narrow to split further
  Panel first = gauss_kronrod_15(f, a, b);
  result.evaluations = 15;
  double total = first.value;
  double total_err = first.error;
  work.push(first);

  auto tolerance = [&] {
    return std::max(opts.abs_tol, opts.rel_tol * std::abs(total));
  };

  while (total_err > tolerance() && !work.empty()) {
    if (result.evaluations + 30 > opts.max_evaluations) {
      result.value = sign * total;
      result.abs_error_estimate = total_err;
      std::ostringstream os;
      os << "quadrature budget of " << opts.max_evaluations
         << " evaluations exhausted; error estimate " << total_err;
      throw ConvergenceError(os.str(), result);
    }
    Panel p = work.top();
    work.pop();
    const double mid = 0.5 * (p.a + p.b);
    if (!(mid > p.a && mid < p.b) ||
        (p.b - p.a) <= 64.0 * std::numeric_limits<double>::epsilon() *
                           std::max(std::abs(p.a), std::abs(p.b))) {
      done.push_back(p);
      continue;
    }
    Panel left = gauss_kronrod_15(f, p.a, mid);
    Panel right = gauss_kronrod_15(f, mid, p.b);
    result.evaluations += 30;
    total += left.value + right.value - p.value;
    total_err += left.error + right.error - p.error;
    work.push(left);
    work.push(right);
  }

  // Re-sum from scratch to shed accumulated cancellation in the running total.
  double sum = 0.0;
  double err = 0.0;
  for (const auto& p : done) {
    sum += p.value;
    err += p.error;
  }
  while (!work.empty()) {
    sum += work.top().value;
    err += work.top().error;
    work.pop();
  }
  result.value = sign * sum;
  result.abs_error_estimate = err;
  if (err > std::max(opts.abs_tol, opts.rel_tol * std::abs(sum))) {
    std::ostringstream os;
    os << "quadrature did not reach tolerance; error estimate " << err;
    throw ConvergenceError(os.str(), result);
  }
  return result;
}

}  // namespace detail

/// Adaptive Gauss-Kronrod quadrature of f over (a, b). Either end may be
/// infinite; the full line is split at 0 and each half-line is cut at a pivot
/// c with |c| >= 1, beyond which x = c exp(u/(1-u)) maps the tail onto
/// (0, 1). Throws ConvergenceError (with the best estimate) when the
/// evaluation budget runs out.
template <class F>
QuadratureResult integrate(const F& f, double a, double b,
                           const QuadratureOptions& opts) {
  if (std::isnan(a) || std::isnan(b)) throw DomainError("integrate: NaN bound");
  if (a == b) return {};
  if (a > b) {
    QuadratureResult r = integrate(f, b, a, opts);
    r.value = -r.value;
    return r;
  }
  std::vector<double> cuts;
  for (double c : opts.breakpoints) {
    if (c > a && c < b) cuts.push_back(c);
  }
  if (!cuts.empty()) {
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
    QuadratureOptions piece = opts;
    piece.breakpoints.clear();
    piece.abs_tol = opts.abs_tol / static_cast<double>(cuts.size() + 1);
    piece.max_evaluations = opts.max_evaluations / (cuts.size() + 1);
    QuadratureResult total;
    double left = a;
    cuts.push_back(b);
    for (double right : cuts) {
      const QuadratureResult r = integrate(f, left, right, piece);
      total.value += r.value;
      total.abs_error_estimate += r.abs_error_estimate;
      total.evaluations += r.evaluations;
      left = right;
    }
    return total;
  }
  const bool lo_inf = std::isinf(a);
  const bool hi_inf = std::isinf(b);
  if (lo_inf && hi_inf) {
    QuadratureOptions half = opts;
    half.abs_tol = 0.5 * opts.abs_tol;
    half.max_evaluations = opts.max_evaluations / 2;
    QuadratureResult left = integrate(f, -kInf, 0.0, half);
    QuadratureResult right = integrate(f, 0.0, kInf, half);
    return {left.value + right.value,
            left.abs_error_estimate + right.abs_error_estimate,
            left.evaluations + right.evaluations};
  }
  if (hi_inf || lo_inf) {
    // Finite piece up to a pivot c, then x = c e^v with v = u/(1-u).
    const double c = hi_inf ? std::max(a, 0.0) + 1.0 : std::min(b, 0.0) - 1.0;
    QuadratureOptions half = opts;
    half.abs_tol = 0.5 * opts.abs_tol;
    half.max_evaluations = opts.max_evaluations / 2;
    QuadratureResult near;
    if (hi_inf && a < c) near = detail::adaptive_finite(f, a, c, half);
    if (lo_inf && c < b) near = detail::adaptive_finite(f, c, b, half);
    auto g = [&](double u) {
      const double w = 1.0 - u;
      const double x = c * std::exp(u / w);
      if (std::isinf(x)) return 0.0;
      const double fx = f(x);
      return fx == 0.0 ? 0.0 : fx * std::abs(x) / (w * w);
    };
    QuadratureResult far = detail::adaptive_finite(g, 0.0, 1.0, half);
    return {near.value + far.value, near.abs_error_estimate + far.abs_error_estimate,
            near.evaluations + far.evaluations};
  }
  return detail::adaptive_finite(f, a, b, opts);
}

template <class F>
QuadratureResult integrate(const F& f, double a, double b, double tol) {
  if (!(tol > 0.0)) throw DomainError("integrate: tolerance must be positive");
  QuadratureOptions opts;
  opts.abs_tol = tol;
  return integrate(f, a, b, opts);
}

// ---------------------------------------------------------------------------

struct SupSearchResult {
  double argmax = 0.0;
  double max_value = -kInf;
  std::size_t grid_points = 0;
  bool refined = false;
};

enum class GridSpacing { Linear, Logarithmic };

/// Maximises f over the open interval (a, b): evaluates a coarse grid of
/// interior points, then golden-section refines around the best one. The
/// returned value is the largest value actually observed, so it never falls
/// below the coarse-grid maximum.
template <class F>
SupSearchResult sup_search(const F& f, double a, double b, std::size_t grid,
                           GridSpacing spacing = GridSpacing::Linear) {
  if (!(a < b)) throw DomainError("sup_search: need a < b");
  if (grid == 0) throw DomainError("sup_search: grid must be positive");
  const bool log_grid = spacing == GridSpacing::Logarithmic;
  if (log_grid && !(a > 0.0)) {
    throw DomainError("sup_search: logarithmic grid needs a > 0");
  }
  const double lo = log_grid ? std::log(a) : a;
  const double hi = log_grid ? std::log(b) : b;
  auto to_x = [&](double v) { return log_grid ? std::exp(v) : v; };
  auto eval = [&](double v) { return f(to_x(v)); };

  const double step = (hi - lo) / static_cast<double>(grid + 1);
  SupSearchResult res;
  res.grid_points = grid;
  std::size_t bad = 0;
  std::size_t best = grid;
  double best_v = lo;
  for (std::size_t i = 0; i < grid; ++i) {
    const double v = lo + step * static_cast<double>(i + 1);
    const double y = eval(v);
    if (!std::isfinite(y)) {
      ++bad;
      continue;
    }
    if (best == grid || y > res.max_value) {
      res.max_value = y;
      best = i;
      best_v = v;
    }
  }
  if (2 * bad > grid || best == grid) {
    std::ostringstream os;
    os << "sup_search: objective non-finite at " << bad << " of " << grid
       << " grid points";
    throw NumericalError(os.str());
  }
  res.argmax = to_x(best_v);

  // Golden-section refinement on the neighbouring grid cell pair.
  double l = best_v - step;
  double r = best_v + step;
  const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
  double x1 = r - gr * (r - l);
  double x2 = l + gr * (r - l);
  double f1 = eval(x1);
  double f2 = eval(x2);
  auto consider = [&](double v, double y) {
    if (std::isfinite(y) && y > res.max_value) {
      res.max_value = y;
      res.argmax = to_x(v);
    }
  };
  consider(x1, f1);
  consider(x2, f2);
  const double scale = std::max(1.0, std::abs(best_v));
  for (int it = 0; it < 200 && (r - l) > 1e-13 * scale; ++it) {
    const bool go_right = (std::isfinite(f2) ? f2 : -kInf) >
                          (std::isfinite(f1) ? f1 : -kInf);
    if (go_right) {
      l = x1;
      x1 = x2;
      f1 = f2;
      x2 = l + gr * (r - l);
      f2 = eval(x2);
      consider(x2, f2);
    } else {
      r = x2;
      x2 = x1;
      f2 = f1;
      x1 = r - gr * (r - l);
      f1 = eval(x1);
      consider(x1, f1);
    }
  }
  res.refined = true;
  return res;
}

// ---------------------------------------------------------------------------

/// Bisection for a monotone f with f(lo), f(hi) of opposite signs. Returns
/// the midpoint of the final bracket, whose width is at most tol (or one ulp).
template <class F>
double find_root_monotone(const F& f, double lo, double hi, double tol) {
  if (!(tol > 0.0)) throw DomainError("find_root_monotone: tol must be > 0");
  if (lo > hi) std::swap(lo, hi);
  double flo = f(lo);
  double fhi = f(hi);
  if (flo == 0.0) return lo;
  if (fhi == 0.0) return hi;
  if (std::isnan(flo) || std::isnan(fhi) || (flo > 0.0) == (fhi > 0.0)) {
    std::ostringstream os;
    os << "find_root_monotone: f(" << lo << ")=" << flo << " and f(" << hi
       << ")=" << fhi << " do not bracket a root";
    throw BracketError(os.str(), flo, fhi);
  }
  const bool increasing = flo < 0.0;
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    const double fm = f(mid);
    if (fm == 0.0) return mid;
    if ((fm < 0.0) == increasing) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

/// Grows [lo, hi] geometrically away from lo until f changes sign, for an
/// increasing or decreasing f. Returns the bracketing upper end.
template <class F>
double expand_upper_bracket(const F& f, double lo, double hi,
                            int max_doublings = 2000) {
  const double flo = f(lo);
  double width = hi - lo;
  for (int i = 0; i < max_doublings; ++i) {
    const double fh = f(hi);
    if (std::isnan(fh)) break;
    if ((fh > 0.0) != (flo > 0.0) || fh == 0.0) return hi;
    width *= 2.0;
    hi = lo + width;
    if (!std::isfinite(hi)) break;
  }
  throw BracketError("expand_upper_bracket: no sign change found", flo, f(hi));
}

}  // namespace heavyconc

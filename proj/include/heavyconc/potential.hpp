#pragma once

// Potentials Phi: R+ -> R+ defining even measures with density
// proportional to exp(-Phi(|x|)).

#include <cmath>
#include <functional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "heavyconc/errors.hpp"
#include "heavyconc/format.hpp"
#include "heavyconc/numerics.hpp"

namespace heavyconc {

struct PotentialSpec {
  std::string name;  // descriptor fragment, e.g. "plog:0.5:1"
  RealFunction phi;
  RealFunction phi_prime;
  RealFunction phi_second;   // only trusted for x > x_smooth
  RealFunction phi_inverse;
  double x_smooth = 1.0;
};

namespace detail {

/// Numeric inverse of an increasing phi with phi(0) = 0, using safeguarded
/// Newton steps inside a bisection bracket.
inline double invert_increasing(const RealFunction& phi,
                                const RealFunction& phi_prime, double y) {
  if (y <= 0.0) return 0.0;
  double lo = 0.0;
  double hi = 1.0;
  while (phi(hi) < y) {
    lo = hi;
    hi *= 2.0;
    if (!std::isfinite(hi)) throw NumericalError("phi inverse: overflow");
  }
  double x = 0.5 * (lo + hi);
  for (int it = 0; it < 200; ++it) {
    const double g = phi(x) - y;
    if (g == 0.0) return x;
    if (g < 0.0) {
      lo = x;
    } else {
      hi = x;
    }
    const double d = phi_prime(x);
    double next = (std::isfinite(d) && d > 0.0) ? x - g / d : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - x) <= 4e-16 * std::max(1.0, x) || hi - lo <= 4e-16 * hi) {
      return next;
    }
    x = next;
  }
  return x;
}

}  // namespace detail

/// Phi(x) = x^p, p > 0.
inline PotentialSpec potential_power(double p) {
  if (!(p > 0.0)) throw DomainError("potential_power: need p > 0");
  PotentialSpec s;
  s.name = "pow:" + format_double(p);
  s.phi = [p](double x) { return std::pow(x, p); };
  s.phi_prime = [p](double x) { return p * std::pow(x, p - 1.0); };
  s.phi_second = [p](double x) { return p * (p - 1.0) * std::pow(x, p - 2.0); };
  s.phi_inverse = [p](double y) { return std::pow(y, 1.0 / p); };
  s.x_smooth = 1.0;
  return s;
}

/// Phi(x) = x^p log(gamma + x)^alpha with gamma = exp(2 alpha / (1 - p)).
inline PotentialSpec potential_plog(double p, double alpha) {
  if (!(p > 0.0 && p < 1.0)) throw DomainError("potential_plog: need 0 < p < 1");
  if (!(alpha > 0.0)) throw DomainError("potential_plog: need alpha > 0");
  const double gamma = std::exp(2.0 * alpha / (1.0 - p));
  PotentialSpec s;
  s.name = "plog:" + format_double(p) + ":" + format_double(alpha);
  s.phi = [=](double x) { return std::pow(x, p) * std::pow(std::log(gamma + x), alpha); };
  s.phi_prime = [=](double x) {
    const double l = std::log(gamma + x);
    return p * std::pow(x, p - 1.0) * std::pow(l, alpha) +
           alpha * std::pow(x, p) * std::pow(l, alpha - 1.0) / (gamma + x);
  };
  s.phi_second = [=](double x) {
    const double l = std::log(gamma + x);
    const double g = gamma + x;
    return p * (p - 1.0) * std::pow(x, p - 2.0) * std::pow(l, alpha) +
           2.0 * p * alpha * std::pow(x, p - 1.0) * std::pow(l, alpha - 1.0) / g +
           alpha * (alpha - 1.0) * std::pow(x, p) * std::pow(l, alpha - 2.0) / (g * g) -
           alpha * std::pow(x, p) * std::pow(l, alpha - 1.0) / (g * g);
  };
  auto phi = s.phi;
  auto phi_prime = s.phi_prime;
  s.phi_inverse = [phi, phi_prime](double y) {
    return detail::invert_increasing(phi, phi_prime, y);
  };
  s.x_smooth = 1.0;
  return s;
}

/// Phi(x) = x: the two-sided exponential law.
inline PotentialSpec potential_linear() {
  PotentialSpec s;
  s.name = "linear";
  s.phi = [](double x) { return x; };
  s.phi_prime = [](double) { return 1.0; };
  s.phi_second = [](double) { return 0.0; };
  s.phi_inverse = [](double y) { return y; };
  s.x_smooth = 0.0;
  return s;
}

/// Phi(x) = c log(1 + x). Integrable only for c > 1; never satisfies the
/// doubling condition Phi(2x) >= B Phi(x) with B > 1.
inline PotentialSpec potential_log1p(double c = 1.0) {
  if (!(c > 0.0)) throw DomainError("potential_log1p: need c > 0");
  PotentialSpec s;
  s.name = "log1p:" + format_double(c);
  s.phi = [c](double x) { return c * std::log1p(x); };
  s.phi_prime = [c](double x) { return c / (1.0 + x); };
  s.phi_second = [c](double x) { return -c / ((1.0 + x) * (1.0 + x)); };
  s.phi_inverse = [c](double y) { return std::expm1(y / c); };
  s.x_smooth = 0.0;
  return s;
}

/// Checks the structural invariants of a potential on a logarithmic grid:
/// Phi(0) = 0, monotonicity, inverse round trip and agreement of phi_prime
/// with centred finite differences beyond x_smooth. Throws DomainError
/// describing the first failure.
inline void validate_potential(const PotentialSpec& spec) {
  if (!spec.phi || !spec.phi_prime || !spec.phi_second || !spec.phi_inverse) {
    throw DomainError("potential '" + spec.name + "': missing function");
  }
  if (!(spec.x_smooth >= 0.0)) {
    throw DomainError("potential '" + spec.name + "': x_smooth must be >= 0");
  }
  if (std::abs(spec.phi(0.0)) > 1e-12) {
    throw DomainError("potential '" + spec.name + "': phi(0) != 0");
  }
  constexpr int kGrid = 200;
  double prev = spec.phi(0.0);
  for (int i = 0; i <= kGrid; ++i) {
    const double x = std::pow(10.0, -3.0 + 9.0 * i / kGrid);
    const double v = spec.phi(x);
    std::ostringstream os;
    if (!std::isfinite(v) || v < prev) {
      os << "potential '" << spec.name << "': phi not non-decreasing at x=" << x;
      throw DomainError(os.str());
    }
    prev = v;
    const double back = spec.phi_inverse(v);
    if (std::abs(back - x) > 1e-8 * std::max(1.0, x)) {
      os << "potential '" << spec.name << "': phi_inverse(phi(" << x
         << ")) = " << back;
      throw DomainError(os.str());
    }
    if (x > spec.x_smooth) {
      const double h = 1e-5 * x;
      const double fd = (spec.phi(x + h) - spec.phi(x - h)) / (2.0 * h);
      const double d = spec.phi_prime(x);
      if (std::abs(fd - d) > 1e-6 * std::abs(d) + 1e-14) {
        os << "potential '" << spec.name << "': phi_prime(" << x << ") = " << d
           << " disagrees with finite difference " << fd;
        throw DomainError(os.str());
      }
    }
  }
}

/// Parses "pow:p", "plog:p:alpha", "linear" or "log1p:c".
inline PotentialSpec parse_potential(std::string_view name) {
  const auto parts = split(name, ':');
  const std::string what = "potential '" + std::string(name) + "'";
  if (parts[0] == "pow" && parts.size() == 2) {
    return potential_power(parse_double(parts[1], what));
  }
  if (parts[0] == "plog" && parts.size() == 3) {
    return potential_plog(parse_double(parts[1], what), parse_double(parts[2], what));
  }
  if (parts[0] == "linear" && parts.size() == 1) return potential_linear();
  if (parts[0] == "log1p" && parts.size() == 2) {
    return potential_log1p(parse_double(parts[1], what));
  }
  throw ParseError(what + ": unknown family");
}

}  // namespace heavyconc

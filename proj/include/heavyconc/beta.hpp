#pragma once

// Weak Poincare functions beta: (0, 1/4) -> (0, inf), non-increasing.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "heavyconc/errors.hpp"
#include "heavyconc/format.hpp"
#include "heavyconc/measures.hpp"
#include "heavyconc/potential.hpp"

namespace heavyconc {

enum class BetaProvenance {
  PowerLawExample,
  StretchedExpExample,
  FromPotential,
  UserTable,
  Custom,
};

inline const char* to_string(BetaProvenance p) {
  switch (p) {
    case BetaProvenance::PowerLawExample: return "PowerLawExample";
    case BetaProvenance::StretchedExpExample: return "StretchedExpExample";
    case BetaProvenance::FromPotential: return "FromPotential";
    case BetaProvenance::UserTable: return "UserTable";
    case BetaProvenance::Custom: return "Custom";
  }
  return "?";
}

/// Immutable, cheap to copy. eval(s) = constant_scale * base(s / n) where n
/// is the tensorisation dimension (1 unless produced by tensorise_beta).
class BetaFunction {
 public:
  using Base = std::function<double(double)>;

  BetaFunction(BetaProvenance provenance, std::string family, Base base,
               double constant_scale = 1.0, Base clamp_test = {})
      : provenance_(provenance),
        family_(std::move(family)),
        base_(std::make_shared<const Base>(std::move(base))),
        clamp_(clamp_test ? std::make_shared<const Base>(std::move(clamp_test))
                          : nullptr),
        scale_(constant_scale) {
    if (!(constant_scale > 0.0) || !std::isfinite(constant_scale)) {
      throw DomainError("BetaFunction: constant_scale must be positive and finite");
    }
  }

  double eval(double s) const {
    if (!(s > 0.0)) throw DomainError("BetaFunction: need s > 0");
    return scale_ * (*base_)(s / static_cast<double>(n_));
  }
  double operator()(double s) const { return eval(s); }

  /// The convention beta(s) = 0 for s >= 1/4.
  double wp_value(double s) const { return s >= 0.25 ? 0.0 : eval(s); }

  /// True when eval(s) had to clamp its argument into the region where the
  /// construction is defined (beta_from_potential only).
  bool clamped(double s) const {
    return clamp_ && (*clamp_)(s / static_cast<double>(n_)) != 0.0;
  }

  BetaProvenance provenance() const { return provenance_; }
  bool tensorised() const { return n_ > 1; }
  std::uint64_t dimension() const { return n_; }
  double constant_scale() const { return scale_; }
  const std::string& family() const { return family_; }

  /// Same function multiplied by lambda.
  BetaFunction scaled(double lambda) const {
    if (!(lambda > 0.0) || !std::isfinite(lambda)) {
      throw DomainError("BetaFunction::scaled: lambda must be positive");
    }
    BetaFunction out = *this;
    out.scale_ = scale_ * lambda;
    return out;
  }
  BetaFunction with_scale(double scale) const {
    if (!(scale > 0.0) || !std::isfinite(scale)) {
      throw DomainError("BetaFunction: constant_scale must be positive and finite");
    }
    BetaFunction out = *this;
    out.scale_ = scale;
    return out;
  }

  /// "family@scale", with "/n=N" appended when tensorised.
  std::string descriptor() const {
    std::string d = family_ + "@" + format_double(scale_);
    if (n_ > 1) d += "/n=" + std::to_string(n_);
    return d;
  }

  friend BetaFunction tensorise_beta(const BetaFunction& beta, std::uint64_t n);

 private:
  BetaProvenance provenance_;
  std::string family_;
  std::shared_ptr<const Base> base_;
  std::shared_ptr<const Base> clamp_;
  double scale_ = 1.0;
  std::uint64_t n_ = 1;
};

/// Checks eval(s1) >= eval(s2) for s1 < s2 and positivity on a logarithmic
/// grid of `points` values in [s_min, 1/4). Returns the first offending s,
/// or NaN when the check passes.
inline double find_monotonicity_violation(const BetaFunction& beta,
                                          std::size_t points = 1000,
                                          double s_min = 1e-12) {
  double prev = kInf;
  const double lo = std::log(s_min);
  const double hi = std::log(0.25);
  for (std::size_t i = 0; i < points; ++i) {
    const double s = std::exp(lo + (hi - lo) * static_cast<double>(i) /
                                       static_cast<double>(points));
    const double v = beta.eval(s);
    if (!(v > 0.0) || std::isnan(v) || v > prev) return s;
    prev = v;
  }
  return std::nan("");
}

inline void require_non_increasing(const BetaFunction& beta) {
  const double s = find_monotonicity_violation(beta);
  if (!std::isnan(s)) {
    throw DomainError("beta '" + beta.descriptor() +
                      "' is not positive and non-increasing near s = " +
                      format_double(s));
  }
}

/// beta(s) = scale * s^{-2/alpha}.
inline BetaFunction beta_power_law(double alpha, double scale = 1.0) {
  if (!(alpha > 0.0)) throw DomainError("beta_power_law: need alpha > 0");
  const double e = -2.0 / alpha;
  BetaFunction b(BetaProvenance::PowerLawExample, "power:" + format_double(alpha),
                 [e](double s) { return std::pow(s, e); }, scale);
  require_non_increasing(b);
  return b;
}

/// beta(s) = scale * log(2/s)^{2/p - 2}.
inline BetaFunction beta_stretched_exp(double p, double scale = 1.0) {
  if (!(p > 0.0 && p < 1.0)) throw DomainError("beta_stretched_exp: need 0 < p < 1");
  const double e = 2.0 / p - 2.0;
  BetaFunction b(BetaProvenance::StretchedExpExample, "sexp:" + format_double(p),
                 [e](double s) { return std::pow(std::log(2.0 / s), e); }, scale);
  require_non_increasing(b);
  return b;
}

/// beta(s) = scale / Phi'(Phi^{-1}(log 1/s))^2. Arguments with
/// log(1/s) < Phi(x_smooth) are clamped to Phi(x_smooth) and reported by
/// BetaFunction::clamped.
inline BetaFunction beta_from_potential(const PotentialSpec& spec, double scale = 1.0) {
  validate_potential(spec);
  const double y_min = spec.phi(spec.x_smooth);
  auto base = [spec, y_min](double s) {
    const double y = std::max(std::log(1.0 / s), y_min);
    const double d = spec.phi_prime(spec.phi_inverse(y));
    return 1.0 / (d * d);
  };
  auto clamp = [y_min](double s) { return std::log(1.0 / s) < y_min ? 1.0 : 0.0; };
  BetaFunction b(BetaProvenance::FromPotential, "potential:" + spec.name, base, scale,
                 clamp);
  require_non_increasing(b);
  return b;
}

/// beta(s) = b.
inline BetaFunction beta_constant(double b) {
  if (!(b > 0.0)) throw DomainError("beta_constant: need b > 0");
  return BetaFunction(BetaProvenance::Custom, "const", [](double) { return 1.0; }, b);
}

/// beta(s) = scale * s^{-exponent}, exponent >= 0.
inline BetaFunction beta_monomial(double exponent, double scale = 1.0) {
  if (!(exponent >= 0.0)) throw DomainError("beta_monomial: need exponent >= 0");
  return BetaFunction(BetaProvenance::Custom, "mono:" + format_double(exponent),
                      [exponent](double s) { return std::pow(s, -exponent); }, scale);
}

/// Tabulated beta: log-log linear interpolation through (s_i, beta_i),
/// constant extrapolation at both ends.
inline BetaFunction beta_table(std::vector<std::pair<double, double>> points,
                               std::string label = "table") {
  if (points.size() < 2) throw DomainError("beta_table: need at least two points");
  std::sort(points.begin(), points.end());
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (!(points[i].first > 0.0) || !(points[i].second > 0.0)) {
      throw DomainError("beta_table: entries must be positive");
    }
    if (i > 0 && points[i].first == points[i - 1].first) {
      throw DomainError("beta_table: duplicate s");
    }
  }
  auto base = [points](double s) {
    if (s <= points.front().first) return points.front().second;
    if (s >= points.back().first) return points.back().second;
    const auto it = std::upper_bound(points.begin(), points.end(), s,
                                     [](double v, const auto& p) { return v < p.first; });
    const auto& [s1, b1] = *(it - 1);
    const auto& [s2, b2] = *it;
    const double w = std::log(s / s1) / std::log(s2 / s1);
    return std::exp((1.0 - w) * std::log(b1) + w * std::log(b2));
  };
  BetaFunction b(BetaProvenance::UserTable, std::move(label), base);
  require_non_increasing(b);
  return b;
}

/// s -> beta(s / n).
inline BetaFunction tensorise_beta(const BetaFunction& beta, std::uint64_t n) {
  if (n == 0) throw DomainError("tensorise_beta: need n >= 1");
  BetaFunction out = beta;
  out.n_ = beta.n_ * n;
  return out;
}

/// The natural beta for a measure model: the closed forms for power and
/// stretched-exponential laws, the potential form otherwise.
inline BetaFunction beta_for_measure(const MeasureModel& m, double scale = 1.0) {
  switch (m.kind()) {
    case MeasureKind::PowerLaw: return beta_power_law(m.parameter(), scale);
    case MeasureKind::StretchedExp: return beta_stretched_exp(m.parameter(), scale);
    case MeasureKind::Potential: return beta_from_potential(m.potential(), scale);
  }
  throw DomainError("beta_for_measure: unknown kind");
}

/// Parses "<family>[@scale][/n=N]" where family is a measure descriptor
/// (power:a, sexp:p, potential:...) or one of const, mono:e.
inline BetaFunction parse_beta(std::string_view descriptor) {
  const std::string what = "beta descriptor '" + std::string(descriptor) + "'";
  std::string text(descriptor);
  std::uint64_t n = 1;
  if (const auto slash = text.find("/n="); slash != std::string::npos) {
    const double v = parse_double(text.substr(slash + 3), what);
    if (!(v >= 1.0) || v != std::floor(v)) throw ParseError(what + ": bad dimension");
    n = static_cast<std::uint64_t>(v);
    text.resize(slash);
  }
  double scale = 1.0;
  if (const auto at = text.find('@'); at != std::string::npos) {
    scale = parse_double(text.substr(at + 1), what);
    text.resize(at);
    if (!(scale > 0.0)) throw ParseError(what + ": scale must be positive");
  }
  const auto parts = split(text, ':');
  BetaFunction b = [&]() -> BetaFunction {
    if (parts[0] == "const" && parts.size() == 1) return beta_constant(scale);
    if (parts[0] == "mono" && parts.size() == 2) {
      return beta_monomial(parse_double(parts[1], what), scale);
    }
    if (parts[0] == "power" && parts.size() == 2) {
      return beta_power_law(parse_double(parts[1], what), scale);
    }
    if (parts[0] == "sexp" && parts.size() == 2) {
      return beta_stretched_exp(parse_double(parts[1], what), scale);
    }
    if (parts[0] == "potential" && parts.size() >= 2) {
      return beta_from_potential(parse_potential(text.substr(10)), scale);
    }
    throw ParseError(what + ": unknown family");
  }();
  return tensorise_beta(b, n);
}

}  // namespace heavyconc

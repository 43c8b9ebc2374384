#pragma once

// One-dimensional even probability measures: the power laws m_alpha, the
// stretched exponentials nu_p and general potentials exp(-Phi(|x|))/Z.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "heavyconc/errors.hpp"
#include "heavyconc/format.hpp"
#include "heavyconc/numerics.hpp"
#include "heavyconc/potential.hpp"

namespace heavyconc {

enum class MeasureKind { PowerLaw, StretchedExp, Potential };

namespace detail {

// Half-line description of an even measure with median 0. All functions take
// x >= 0 and tail masses tau in (0, 1/2].
class HalfLineMeasure {
 public:
  virtual ~HalfLineMeasure() = default;
  virtual double density(double x) const = 0;
  virtual double log_density(double x) const = 0;
  virtual double tail(double x) const = 0;  // mu([x, +inf))
  virtual double tail_quantile(double tau) const = 0;
  // Same as tail_quantile(tau) where v = 1/2 - tau is passed exactly; used by
  // the sampler and allowed to be interpolated.
  virtual double fast_tail_quantile(double tau, double v) const = 0;
};

class PowerLawHalf final : public HalfLineMeasure {
 public:
  explicit PowerLawHalf(double alpha) : alpha_(alpha) {}
  double density(double x) const override {
    return 0.5 * alpha_ * std::pow(1.0 + x, -1.0 - alpha_);
  }
  double log_density(double x) const override {
    return std::log(0.5 * alpha_) - (1.0 + alpha_) * std::log1p(x);
  }
  double tail(double x) const override {
    return 0.5 * std::exp(-alpha_ * std::log1p(x));
  }
  double tail_quantile(double tau) const override {
    return std::expm1(-std::log(2.0 * tau) / alpha_);
  }
  double fast_tail_quantile(double tau, double) const override {
    return tail_quantile(tau);
  }

 private:
  double alpha_;
};

// Density exp(-Phi(x))/Z tabulated on nodes x_i = Phi^{-1}(i * dy). Tail
// masses at the nodes are accumulated once by adaptive quadrature; queries
// add one short quadrature from x to the next node.
class TabulatedHalf final : public HalfLineMeasure {
 public:
  TabulatedHalf(PotentialSpec spec, std::optional<double> normalization)
      : spec_(std::move(spec)) {
    build_nodes();
    build_masses(normalization);
    build_sampling_table();
  }

  double normalization() const { return z_; }

  double density(double x) const override {
    return std::exp(-spec_.phi(x)) / z_;
  }
  double log_density(double x) const override { return -spec_.phi(x) - log_z_; }

  double tail(double x) const override {
    if (x <= 0.0) return tail_[0];
    const auto& phi = spec_.phi;
    auto rho = [&](double u) { return std::exp(-phi(u)); };
    if (x >= nodes_.back()) {
      QuadratureOptions o;
      o.abs_tol = 1e-320;
      o.rel_tol = 1e-13;
      return integrate(rho, x, kInf, o).value / z_;
    }
    const std::size_t i = static_cast<std::size_t>(
        std::upper_bound(nodes_.begin(), nodes_.end(), x) - nodes_.begin());
    // nodes_[i-1] <= x < nodes_[i]
    QuadratureOptions o;
    o.abs_tol = 1e-16 * tail_[i] * z_ + 1e-320;
    o.rel_tol = 1e-14;
    return tail_[i] + integrate(rho, x, nodes_[i], o).value / z_;
  }

  double tail_quantile(double tau) const override {
    if (tau >= tail_[0]) return 0.0;
    double lo;
    double hi;
    if (tau <= tail_.back()) {
      lo = nodes_.back();
      hi = 2.0 * lo + 1.0;
      while (tail(hi) > tau) {
        lo = hi;
        hi *= 2.0;
        if (!std::isfinite(hi)) throw NumericalError("tail_quantile: overflow");
      }
    } else {
      // tail_ is decreasing: first index with tail_[i] < tau.
      const auto it = std::upper_bound(tail_.begin(), tail_.end(), tau,
                                       [](double t, double v) { return t > v; });
      const std::size_t i = static_cast<std::size_t>(it - tail_.begin());
      lo = nodes_[i - 1];
      hi = nodes_[i];
    }
    return solve_tail(tau, lo, hi, 0.5 * (lo + hi));
  }

  double fast_tail_quantile(double tau, double v) const override {
    if (v <= 0.0) return 0.0;
    const double zeta = std::log(tau) - std::log(v);
    if (zeta >= kZetaHi) return v / density(0.0);
    if (zeta < kZetaLo) return tail_quantile(tau);
    const double pos = (zeta - kZetaLo) / kZetaStep;
    std::size_t j = static_cast<std::size_t>(pos);
    if (j + 1 >= table_x_.size()) j = table_x_.size() - 2;
    const double t = pos - static_cast<double>(j);
    const double t2 = t * t;
    const double t3 = t2 * t;
    const double h00 = 2 * t3 - 3 * t2 + 1;
    const double h10 = t3 - 2 * t2 + t;
    const double h01 = -2 * t3 + 3 * t2;
    const double h11 = t3 - t2;
    return h00 * table_x_[j] + h10 * kZetaStep * table_dx_[j] +
           h01 * table_x_[j + 1] + h11 * kZetaStep * table_dx_[j + 1];
  }

 private:
  static constexpr double kDy = 0.25;
  static constexpr double kYMax = 700.0;
  static constexpr double kXMax = 1e12;
  static constexpr double kZetaLo = -42.0;
  static constexpr double kZetaHi = 42.0;
  static constexpr double kZetaStep = 0.01;

  void build_nodes() {
    nodes_.push_back(0.0);
    for (int i = 1;; ++i) {
      const double y = kDy * i;
      const double x = spec_.phi_inverse(y);
      if (!std::isfinite(x) || x > kXMax || y > kYMax) break;
      if (x > nodes_.back()) nodes_.push_back(x);
    }
  }

  void build_masses(std::optional<double> normalization) {
    const auto& phi = spec_.phi;
    auto rho = [&](double u) { return std::exp(-phi(u)); };
    std::vector<double> panel(nodes_.size(), 0.0);
    for (std::size_t i = 0; i + 1 < nodes_.size(); ++i) {
      QuadratureOptions o;
      o.abs_tol = 1e-320;
      o.rel_tol = 1e-14;
      panel[i] = integrate(rho, nodes_[i], nodes_[i + 1], o).value;
    }
    QuadratureOptions o;
    o.abs_tol = 1e-320;
    o.rel_tol = 1e-13;
    const double far = integrate(rho, nodes_.back(), kInf, o).value;
    tail_.assign(nodes_.size(), 0.0);
    double acc = far;
    tail_.back() = acc;
    for (std::size_t i = nodes_.size() - 1; i-- > 0;) {
      acc += panel[i];
      tail_[i] = acc;
    }
    z_ = normalization ? *normalization : 2.0 * tail_[0];
    log_z_ = std::log(z_);
    for (double& t : tail_) t /= z_;
  }

  // Safeguarded Newton on tail(x) = tau inside the bracket [lo, hi].
  double solve_tail(double tau, double lo, double hi, double x) const {
    if (!(x > lo && x < hi)) x = 0.5 * (lo + hi);
    for (int it = 0; it < 200; ++it) {
      const double g = tail(x) - tau;  // decreasing in x
      if (g == 0.0) return x;
      if (g > 0.0) {
        lo = x;
      } else {
        hi = x;
      }
      const double step = g / density(x);
      if (std::abs(g) <= 1e-15 * tau || std::abs(step) <= 1e-15 * std::max(1.0, x) ||
          hi - lo <= 1e-15 * std::max(1.0, hi)) {
        return std::clamp(x + step, lo, hi);
      }
      double next = x + step;
      if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
      x = next;
    }
    return x;
  }

  // Cubic Hermite table of the tail quantile in zeta = log(tau/(1/2 - tau)),
  // with exact slopes dx/dzeta = -2 tau (1/2 - tau) / rho(x).
  void build_sampling_table() {
    const std::size_t count =
        static_cast<std::size_t>(std::llround((kZetaHi - kZetaLo) / kZetaStep)) + 1;
    table_x_.resize(count);
    table_dx_.resize(count);
    double guess = -1.0;
    for (std::size_t j = 0; j < count; ++j) {
      const double zeta = kZetaLo + kZetaStep * static_cast<double>(j);
      // tau / (1/2 - tau) = e^zeta
      const double e = std::exp(zeta);
      const double tau = 0.5 * e / (1.0 + e);
      const double v = 0.5 / (1.0 + e);
      double x;
      if (guess > 0.0 && tau < tail_[0]) {
        auto it = std::upper_bound(tail_.begin(), tail_.end(), tau,
                                   [](double t, double w) { return t > w; });
        const std::size_t i = static_cast<std::size_t>(it - tail_.begin());
        if (i == 0 || i >= tail_.size()) {
          x = tail_quantile(tau);
        } else {
          x = solve_tail(tau, nodes_[i - 1], nodes_[i], guess);
        }
      } else {
        x = tail_quantile(tau);
      }
      table_x_[j] = x;
      table_dx_[j] = -2.0 * tau * v / density(x);
      guess = x + kZetaStep * table_dx_[j];
    }
  }

  PotentialSpec spec_;
  std::vector<double> nodes_;
  std::vector<double> tail_;
  double z_ = 1.0;
  double log_z_ = 0.0;
  std::vector<double> table_x_;
  std::vector<double> table_dx_;
};

}  // namespace detail

/// Immutable handle to an even 1-D probability measure with median 0.
/// Copies share the same underlying tables.
class MeasureModel {
 public:
  MeasureKind kind() const { return kind_; }
  /// alpha for PowerLaw, p for StretchedExp, NaN for Potential.
  double parameter() const { return parameter_; }
  const std::string& descriptor() const { return descriptor_; }
  double median() const { return 0.0; }
  double normalization() const { return normalization_; }
  bool is_even() const { return true; }
  /// Phi with density = exp(-Phi(|x|)) / normalization().
  const PotentialSpec& potential() const { return potential_; }

  double density(double x) const { return half_->density(std::abs(x)); }
  double log_density(double x) const { return half_->log_density(std::abs(x)); }

  /// mu([x, +inf))
  double upper_tail(double x) const {
    return x >= 0.0 ? half_->tail(x) : 1.0 - half_->tail(-x);
  }
  /// mu((-inf, x])
  double lower_tail(double x) const { return upper_tail(-x); }
  double cdf(double x) const { return lower_tail(x); }

  double quantile(double q) const {
    if (!(q > 0.0 && q < 1.0)) throw DomainError("quantile: need 0 < q < 1");
    if (q == 0.5) return 0.0;
    return q > 0.5 ? half_->tail_quantile(1.0 - q) : -half_->tail_quantile(q);
  }
  /// x with mu([x, +inf)) = tau, accurate in relative terms for small tau.
  double upper_quantile(double tau) const {
    if (!(tau > 0.0 && tau < 1.0)) {
      throw DomainError("upper_quantile: need 0 < tau < 1");
    }
    if (tau <= 0.5) return half_->tail_quantile(tau);
    return -half_->tail_quantile(1.0 - tau);
  }
  /// x with mu((-inf, x]) = tau.
  double lower_quantile(double tau) const { return -upper_quantile(tau); }

  /// Inverse-CDF transform used by the sampler. Equals quantile(u) up to the
  /// interpolation error of the sampling table (closed form for power laws).
  double sample_from_uniform(double u) const {
    const bool upper = u >= 0.5;
    const double tau = upper ? 1.0 - u : u;
    const double v = upper ? u - 0.5 : 0.5 - u;
    const double x = half_->fast_tail_quantile(tau, v);
    return upper ? x : -x;
  }

  friend MeasureModel make_power_law(double alpha);
  friend MeasureModel make_stretched_exp(double p);
  friend MeasureModel make_potential_measure(PotentialSpec spec);

 private:
  MeasureModel() = default;

  MeasureKind kind_ = MeasureKind::PowerLaw;
  double parameter_ = 0.0;
  std::string descriptor_;
  double normalization_ = 1.0;
  PotentialSpec potential_;
  std::shared_ptr<const detail::HalfLineMeasure> half_;
};

/// m_alpha: density (alpha/2)(1+|t|)^{-1-alpha}.
inline MeasureModel make_power_law(double alpha) {
  if (!(alpha > 0.0) || !std::isfinite(alpha)) {
    throw DomainError("make_power_law: alpha must be positive, got " +
                      format_double(alpha));
  }
  MeasureModel m;
  m.kind_ = MeasureKind::PowerLaw;
  m.parameter_ = alpha;
  m.descriptor_ = "power:" + format_double(alpha);
  m.normalization_ = 2.0 / alpha;
  m.potential_ = potential_log1p(1.0 + alpha);
  m.half_ = std::make_shared<detail::PowerLawHalf>(alpha);
  return m;
}

/// nu_p: density exp(-|t|^p) / (2 Gamma(1 + 1/p)), 0 < p < 1.
inline MeasureModel make_stretched_exp(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    throw DomainError("make_stretched_exp: p must lie in (0,1), got " +
                      format_double(p));
  }
  MeasureModel m;
  m.kind_ = MeasureKind::StretchedExp;
  m.parameter_ = p;
  m.descriptor_ = "sexp:" + format_double(p);
  m.normalization_ = 2.0 * std::tgamma(1.0 + 1.0 / p);
  m.potential_ = potential_power(p);
  m.half_ = std::make_shared<detail::TabulatedHalf>(m.potential_, m.normalization_);
  return m;
}

/// Ratio Phi(x)/log(x) far out; exp(-Phi) is integrable when it stays
/// above 1. Returns the smallest ratio seen and where.
inline std::pair<double, double> tail_comparison_constant(const PotentialSpec& spec) {
  double worst = kInf;
  double where = 0.0;
  for (int j = 6; j <= 12; ++j) {
    const double x = std::pow(10.0, j);
    const double c = spec.phi(x) / std::log(x);
    if (c < worst) {
      worst = c;
      where = x;
    }
  }
  return {worst, where};
}

/// mu_Phi: density exp(-Phi(|x|)) / Z_Phi with Z_Phi by quadrature.
inline MeasureModel make_potential_measure(PotentialSpec spec) {
  validate_potential(spec);
  const auto [c, where] = tail_comparison_constant(spec);
  if (!(c > 1.001)) {
    throw DomainError("make_potential_measure: non-integrable tail for '" +
                      spec.name + "': tail comparison test Phi(x) >= c log x "
                      "with c > 1 failed (Phi(x)/log x = " + format_double(c) +
                      " at x = " + format_double(where) + ")");
  }
  MeasureModel m;
  m.kind_ = MeasureKind::Potential;
  m.parameter_ = std::nan("");
  m.descriptor_ = "potential:" + spec.name;
  m.potential_ = spec;
  auto half = std::make_shared<detail::TabulatedHalf>(spec, std::nullopt);
  m.normalization_ = half->normalization();
  m.half_ = std::move(half);
  return m;
}

/// Parses "power:alpha", "sexp:p" or "potential:<name>" with <name> as in
/// parse_potential, e.g. "potential:plog:0.5:1".
inline MeasureModel parse_measure(std::string_view descriptor) {
  const auto parts = split(descriptor, ':');
  const std::string what = "measure descriptor '" + std::string(descriptor) + "'";
  auto need = [&](std::size_t n) {
    if (parts.size() != n) throw ParseError(what + ": wrong number of fields");
  };
  if (parts[0] == "power") {
    need(2);
    return make_power_law(parse_double(parts[1], what));
  }
  if (parts[0] == "sexp") {
    need(2);
    return make_stretched_exp(parse_double(parts[1], what));
  }
  if (parts[0] == "potential" && parts.size() >= 2) {
    return make_potential_measure(parse_potential(descriptor.substr(10)));
  }
  throw ParseError(what + ": unknown family");
}

// ---------------------------------------------------------------------------
// Sampling

/// Maps a 64-bit word to a double in the open interval (0, 1).
inline double uniform_open01(std::uint64_t bits) {
  return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
}

/// `count` draws from the model by inverse-CDF transform of a uniform stream
/// produced by std::mt19937_64 seeded with `seed`. Bit-for-bit reproducible.
inline std::vector<double> sample(const MeasureModel& model, std::uint64_t seed,
                                  std::size_t count) {
  if (count == 0) throw DomainError("sample: count must be >= 1");
  std::mt19937_64 engine(seed);
  std::vector<double> out(count);
  for (auto& x : out) x = model.sample_from_uniform(uniform_open01(engine()));
  return out;
}

}  // namespace heavyconc

#pragma once

// Checks var(f) <= 12 gamma(s) int |f'|^2 + s osc(f)^2 on a fixed family of
// test functions, given a measure-capacity criterion function gamma.

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "heavyconc/beta.hpp"
#include "heavyconc/capacity.hpp"
#include "heavyconc/measures.hpp"
#include "heavyconc/numerics.hpp"

namespace heavyconc {

enum class TestShape { UpperRamp, LowerRamp, Tent, Sigmoid };

/// UpperRamp: 0 up to at - width, linear, 1 from `at` on.
/// LowerRamp: 1 up to `at`, linear, 0 from at + width on.
/// Tent: max(0, 1 - |t - at| / width).  Sigmoid: tanh((t - at) / width).
struct TestFunction {
  TestShape shape = TestShape::UpperRamp;
  double at = 0.0;
  double width = 1.0;
  std::string label;

  double osc() const { return shape == TestShape::Sigmoid ? 2.0 : 1.0; }
};

/// Ramps at 20 tail-mass levels on each side with widths {0.01, 0.1, 1},
/// tents and sigmoids centred at the median and in the tails with widths
/// {0.1, 1, 10}.
inline std::vector<TestFunction> default_test_family(const MeasureModel& model) {
  std::vector<TestFunction> out;
  for (int j = 0; j < 20; ++j) {
    const double tau = 0.45 * std::pow(1e-6 / 0.45, j / 19.0);
    for (double delta : {0.01, 0.1, 1.0}) {
      const std::string tag = "tau=" + format_double(tau) + ",w=" + format_double(delta);
      out.push_back({TestShape::UpperRamp, model.upper_quantile(tau), delta, "ramp+," + tag});
      out.push_back({TestShape::LowerRamp, model.lower_quantile(tau), delta, "ramp-," + tag});
    }
  }
  for (double tau : {0.5, 0.05, 0.001}) {
    const double c = tau == 0.5 ? model.median() : model.upper_quantile(tau);
    for (double w : {0.1, 1.0, 10.0}) {
      const std::string tag = "tau=" + format_double(tau) + ",w=" + format_double(w);
      out.push_back({TestShape::Tent, c, w, "tent," + tag});
      out.push_back({TestShape::Sigmoid, c, w, "sigmoid," + tag});
    }
  }
  return out;
}

struct TestFunctionMoments {
  double variance = 0.0;
  double energy = 0.0;  // int |f'|^2 d mu
  double osc2 = 0.0;
};

/// Variance, Dirichlet energy and squared oscillation of f under the model,
/// by quadrature split at every kink of f and of the density.
inline TestFunctionMoments test_function_moments(const MeasureModel& model,
                                                 const TestFunction& f) {
  QuadratureOptions o;
  o.abs_tol = 1e-15;
  o.rel_tol = 1e-12;
  auto rho = [&](double t) { return model.density(t); };
  auto piece = [&](auto g, double a, double b) {
    QuadratureOptions p = o;
    p.breakpoints = {model.median()};
    return integrate([&](double t) { return g(t) * rho(t); }, a, b, p).value;
  };
  const double w = f.width;
  double mean = 0.0;
  double second = 0.0;
  double energy = 0.0;
  switch (f.shape) {
    case TestShape::UpperRamp: {
      const double a = f.at - w;
      auto lin = [&](double t) { return (t - a) / w; };
      const double tail = model.upper_tail(f.at);
      mean = piece(lin, a, f.at) + tail;
      second = piece([&](double t) { return lin(t) * lin(t); }, a, f.at) + tail;
      energy = piece([](double) { return 1.0; }, a, f.at) / (w * w);
      break;
    }
    case TestShape::LowerRamp: {
      const double b = f.at + w;
      auto lin = [&](double t) { return (b - t) / w; };
      const double tail = model.lower_tail(f.at);
      mean = piece(lin, f.at, b) + tail;
      second = piece([&](double t) { return lin(t) * lin(t); }, f.at, b) + tail;
      energy = piece([](double) { return 1.0; }, f.at, b) / (w * w);
      break;
    }
    case TestShape::Tent: {
      auto tent = [&](double t) { return std::max(0.0, 1.0 - std::abs(t - f.at) / w); };
      for (auto [a, b] : {std::pair{f.at - w, f.at}, std::pair{f.at, f.at + w}}) {
        mean += piece(tent, a, b);
        second += piece([&](double t) { return tent(t) * tent(t); }, a, b);
        energy += piece([](double) { return 1.0; }, a, b) / (w * w);
      }
      break;
    }
    case TestShape::Sigmoid: {
      auto sig = [&](double t) { return std::tanh((t - f.at) / w); };
      auto d2 = [&](double t) {
        const double c = std::cosh((t - f.at) / w);
        return std::isinf(c) ? 0.0 : 1.0 / (c * c * c * c * w * w);
      };
      QuadratureOptions p = o;
      p.breakpoints = {model.median(), f.at};
      mean = integrate([&](double t) { return sig(t) * rho(t); }, -kInf, kInf, p).value;
      second = integrate([&](double t) { return sig(t) * sig(t) * rho(t); }, -kInf, kInf, p).value;
      energy = integrate([&](double t) { return d2(t) * rho(t); }, -kInf, kInf, p).value;
      break;
    }
  }
  TestFunctionMoments m;
  m.variance = std::max(0.0, second - mean * mean);
  m.energy = energy;
  m.osc2 = f.osc() * f.osc();
  return m;
}

struct WpCheckRow {
  std::string function;
  double s = 0.0;
  double variance = 0.0;
  double energy = 0.0;
  double osc2 = 0.0;
  double bound = 0.0;  // 12 gamma(s) energy + s osc^2
  double ratio = 0.0;  // variance / bound
};

struct WpVerificationReport {
  std::vector<WpCheckRow> rows;
  double max_ratio = 0.0;
  std::size_t violations = 0;  // rows with ratio > 1
  // min over half-lines of capa(A) gamma(mu(A)) / mu(A); the criterion
  // hypothesis asks for >= 1.
  double criterion_min = kInf;
  bool criterion_holds() const { return criterion_min >= 1.0; }
};

/// Default s grid: 30 logarithmic points in [1e-8, 0.24] plus 0.25 and 0.3,
/// where the beta term is dropped.
inline std::vector<double> default_wp_s_grid() {
  std::vector<double> s;
  for (int i = 0; i < 30; ++i) s.push_back(1e-8 * std::pow(0.24 / 1e-8, i / 29.0));
  s.push_back(0.25);
  s.push_back(0.3);
  return s;
}

inline WpVerificationReport verify_wp_from_criterion(const MeasureModel& model,
                                                     const BetaFunction& gamma,
                                                     const std::vector<TestFunction>& family,
                                                     const std::vector<double>& s_grid) {
  WpVerificationReport rep;
  for (Side side : {Side::Upper, Side::Lower}) {
    for (int i = 0; i < 128; ++i) {
      const double tau = 0.5 * std::pow(1e-12 / 0.5, (i + 1) / 128.0);
      const double x = side == Side::Upper ? model.upper_quantile(tau)
                                           : model.lower_quantile(tau);
      const double cap = half_line_capacity(model, x).value;
      rep.criterion_min = std::min(rep.criterion_min, cap * gamma.eval(tau) / tau);
    }
  }
  for (const auto& f : family) {
    const TestFunctionMoments m = test_function_moments(model, f);
    for (double s : s_grid) {
      if (!(s > 0.0)) throw DomainError("verify_wp_from_criterion: s must be positive");
      WpCheckRow row;
      row.function = f.label;
      row.s = s;
      row.variance = m.variance;
      row.energy = m.energy;
      row.osc2 = m.osc2;
      row.bound = 12.0 * gamma.wp_value(s) * m.energy + s * m.osc2;
      row.ratio = row.bound > 0.0 ? m.variance / row.bound : (m.variance > 0.0 ? kInf : 0.0);
      rep.max_ratio = std::max(rep.max_ratio, row.ratio);
      if (row.ratio > 1.0) ++rep.violations;
      rep.rows.push_back(std::move(row));
    }
  }
  return rep;
}

inline WpVerificationReport verify_wp_from_criterion(const MeasureModel& model,
                                                     const BetaFunction& gamma) {
  return verify_wp_from_criterion(model, gamma, default_test_family(model),
                                  default_wp_s_grid());
}

/// gamma = max(B-, B+) beta: with it the criterion capa(A) >= mu(A)/gamma(mu(A))
/// holds for every half-line, by definition of B.
inline BetaFunction criterion_gamma(const MeasureModel& model, const BetaFunction& beta,
                                    const CriterionOptions& opts = {}) {
  const CriterionConstants c = compute_criterion_constants(model, beta, opts);
  if (!c.finite()) {
    throw NumericalError("criterion_gamma: B constant diverges for beta '" +
                         beta.descriptor() + "'");
  }
  return beta.scaled(std::max(c.B_minus.value, c.B_plus.value));
}

/// Honest WP scale for beta: upper_C = 12 max(B-, B+), so that the model
/// satisfies WP with upper_C * beta.
inline double calibrate_wp_scale(const MeasureModel& model, const BetaFunction& beta,
                                 const CriterionOptions& opts = {}) {
  const CriterionConstants c = compute_criterion_constants(model, beta, opts);
  if (!c.finite()) {
    throw NumericalError("calibrate_wp_scale: B constant diverges for beta '" +
                         beta.descriptor() + "'");
  }
  return c.upper_C;
}

}  // namespace heavyconc

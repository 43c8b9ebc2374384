#pragma once

// Monte Carlo tails of 1-Lipschitz functions under product measures, with
// exact binomial confidence intervals, and the comparison against TailBound
// routes.
//
// Seed contract. splitmix64(z) is the standard finaliser
//   z += 0x9e3779b97f4a7c15; z = (z ^ z>>30) * 0xbf58476d1ce4e5b9;
//   z = (z ^ z>>27) * 0x94d049bb133111eb; return z ^ z>>31.
// Block b of a run with master seed S uses block_seed = splitmix64(S + (b+1) G)
// with G = 0x9e3779b97f4a7c15, and coordinate j inside it draws
// sample(model, splitmix64(block_seed + (j+1) G), block_size). Blocks hold
// 4096 points. Blocks 0.. cover the median half, the rest the tail half.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include <boost/math/distributions/binomial.hpp>

#include "heavyconc/concentration.hpp"
#include "heavyconc/errors.hpp"
#include "heavyconc/format.hpp"
#include "heavyconc/measures.hpp"
#include "heavyconc/weak_poincare.hpp"

namespace heavyconc {

inline constexpr std::uint64_t kGoldenGamma = 0x9e3779b97f4a7c15ULL;
inline constexpr std::size_t kMcBlock = 4096;

inline std::uint64_t splitmix64(std::uint64_t z) {
  z += kGoldenGamma;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
  return splitmix64(seed + (index + 1) * kGoldenGamma);
}

// ---------------------------------------------------------------------------
// Test functions.

enum class LipschitzKind { LinearUnit, MaxCoordinate, DistanceToProductSet };

/// LinearUnit: <direction, x> (empty direction means the diagonal
/// (1, ..., 1)/sqrt(n)). MaxCoordinate: max_i x_i. DistanceToProductSet:
/// Euclidean distance to (-inf, threshold]^n. All are 1-Lipschitz.
struct LipschitzTestFunction {
  LipschitzKind kind = LipschitzKind::LinearUnit;
  std::vector<double> direction;
  double threshold = 0.0;
  double lipschitz_constant = 1.0;

  double operator()(const double* x, std::size_t n) const {
    switch (kind) {
      case LipschitzKind::LinearUnit: {
        double acc = 0.0;
        if (direction.empty()) {
          for (std::size_t i = 0; i < n; ++i) acc += x[i];
          return acc / std::sqrt(static_cast<double>(n));
        }
        for (std::size_t i = 0; i < n; ++i) acc += direction[i] * x[i];
        return acc;
      }
      case LipschitzKind::MaxCoordinate:
        return *std::max_element(x, x + n);
      case LipschitzKind::DistanceToProductSet: {
        double acc = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
          const double d = x[i] - threshold;
          if (d > 0.0) acc += d * d;
        }
        return std::sqrt(acc);
      }
    }
    return 0.0;
  }

  std::string label() const {
    switch (kind) {
      case LipschitzKind::LinearUnit:
        if (direction.empty()) return "linear";
        return "linear:custom";
      case LipschitzKind::MaxCoordinate: return "max";
      case LipschitzKind::DistanceToProductSet: return "dist:" + format_double(threshold);
    }
    return "?";
  }
};

inline LipschitzTestFunction linear_unit(std::vector<double> direction = {}) {
  if (!direction.empty()) {
    double norm2 = 0.0;
    for (double v : direction) norm2 += v * v;
    if (std::abs(norm2 - 1.0) > 1e-12) throw DomainError("linear_unit: direction must be a unit vector");
  }
  return {LipschitzKind::LinearUnit, std::move(direction), 0.0, 1.0};
}

/// e_1 in dimension n.
inline LipschitzTestFunction linear_first_coordinate(std::size_t n) {
  std::vector<double> d(n, 0.0);
  d.at(0) = 1.0;
  return linear_unit(std::move(d));
}

inline LipschitzTestFunction max_coordinate() {
  return {LipschitzKind::MaxCoordinate, {}, 0.0, 1.0};
}

inline LipschitzTestFunction distance_to_product_set(double threshold) {
  return {LipschitzKind::DistanceToProductSet, {}, threshold, 1.0};
}

/// "linear", "linear:e1", "max" or "dist:<threshold>".
inline LipschitzTestFunction parse_test_function(std::string_view text, std::size_t n) {
  const std::string what = "test function '" + std::string(text) + "'";
  if (text == "linear") return linear_unit();
  if (text == "linear:e1") return linear_first_coordinate(n);
  if (text == "max") return max_coordinate();
  if (text.substr(0, 5) == "dist:") {
    return distance_to_product_set(parse_double(std::string(text.substr(5)), what));
  }
  throw ParseError(what + ": expected linear, linear:e1, max or dist:<q>");
}

/// max |F(x) - F(y)| / |x - y|_2 over `pairs` random pairs in dimension n,
/// half of them far apart (Cauchy-like scales) and half nearby.
inline double empirical_lipschitz_ratio(const LipschitzTestFunction& f, std::size_t n,
                                        std::size_t pairs, std::uint64_t seed) {
  std::mt19937_64 eng(seed);
  std::vector<double> x(n), y(n);
  double worst = 0.0;
  for (std::size_t p = 0; p < pairs; ++p) {
    const double scale = std::tan(3.0 * (uniform_open01(eng()) - 0.5));
    const double eps = p % 2 == 0 ? 1.0 : 1e-6;
    double d2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      x[i] = scale * (2.0 * uniform_open01(eng()) - 1.0) * 10.0;
      y[i] = x[i] + eps * (2.0 * uniform_open01(eng()) - 1.0);
      d2 += (x[i] - y[i]) * (x[i] - y[i]);
    }
    if (d2 == 0.0) continue;
    worst = std::max(worst, std::abs(f(x.data(), n) - f(y.data(), n)) / std::sqrt(d2));
  }
  return worst;
}

// ---------------------------------------------------------------------------
// Binomial intervals.

struct BinomialInterval {
  double low = 0.0;
  double high = 1.0;
};

/// Exact (Clopper-Pearson) two-sided interval at the given confidence.
inline BinomialInterval clopper_pearson(std::uint64_t hits, std::uint64_t trials,
                                        double confidence = 0.99) {
  using boost::math::binomial_distribution;
  if (trials == 0 || hits > trials) throw DomainError("clopper_pearson: bad counts");
  const double a = 0.5 * (1.0 - confidence);
  const auto nt = static_cast<double>(trials);
  const auto nh = static_cast<double>(hits);
  BinomialInterval ci;
  ci.low = hits == 0 ? 0.0 : binomial_distribution<>::find_lower_bound_on_p(nt, nh, a);
  ci.high = hits == trials ? 1.0 : binomial_distribution<>::find_upper_bound_on_p(nt, nh, a);
  return ci;
}

// ---------------------------------------------------------------------------
// Tail estimation.

/// One-sided P(F - m > k) and two-sided P(|F - m| > k) estimates.
struct TailEstimate {
  double k = 0.0;
  std::uint64_t n = 1;
  std::uint64_t samples = 0;  // points in the tail half
  std::uint64_t hits = 0;
  double point = 0.0;
  double ci_low = 0.0;
  double ci_high = 1.0;
  std::uint64_t hits_abs = 0;
  double point_abs = 0.0;
  double ci_low_abs = 0.0;
  double ci_high_abs = 1.0;
};

struct TailRun {
  std::string function;
  double median = 0.0;        // from the first half
  double median_delta = 0.0;  // 99% CI half-width of the median
  std::uint64_t median_samples = 0;
  std::vector<TailEstimate> estimates;
};

namespace detail {

template <class Body>
void parallel_blocks(std::size_t count, const Body& body) {
  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  const std::size_t workers = std::min<std::size_t>(hw, count);
  std::atomic<std::size_t> next{0};
  auto loop = [&] {
    for (std::size_t b = next++; b < count; b = next++) body(b);
  };
  if (workers <= 1) {
    loop();
    return;
  }
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(loop);
  for (auto& t : pool) t.join();
}

/// F values of the points in blocks [first, first + count) for each f.
inline std::vector<std::vector<double>> evaluate_blocks(
    const MeasureModel& model, std::size_t n, const std::vector<LipschitzTestFunction>& fs,
    std::uint64_t seed, std::size_t first_block, std::size_t points) {
  const std::size_t blocks = (points + kMcBlock - 1) / kMcBlock;
  std::vector<std::vector<std::vector<double>>> per_block(blocks);
  parallel_blocks(blocks, [&](std::size_t b) {
    const std::size_t len = std::min(kMcBlock, points - b * kMcBlock);
    const std::uint64_t bs = derive_seed(seed, first_block + b);
    std::vector<double> grid(len * n);  // row-major: point i, coordinate j
    for (std::size_t j = 0; j < n; ++j) {
      const std::vector<double> col = sample(model, derive_seed(bs, j), len);
      for (std::size_t i = 0; i < len; ++i) grid[i * n + j] = col[i];
    }
    auto& out = per_block[b];
    out.assign(fs.size(), std::vector<double>(len));
    for (std::size_t f = 0; f < fs.size(); ++f) {
      for (std::size_t i = 0; i < len; ++i) out[f][i] = fs[f](grid.data() + i * n, n);
    }
  });
  std::vector<std::vector<double>> values(fs.size());
  for (auto& v : values) v.reserve(points);
  for (const auto& blk : per_block) {
    for (std::size_t f = 0; f < fs.size(); ++f) {
      values[f].insert(values[f].end(), blk[f].begin(), blk[f].end());
    }
  }
  return values;
}

}  // namespace detail

inline constexpr double kMedianZ = 2.5758293035489004;  // 99.5% normal quantile

/// Draws `samples` points of model^n; the first half estimates the median of
/// each F, the second half counts tail events against that median. All
/// functions share the same points.
inline std::vector<TailRun> estimate_tail_multi(const MeasureModel& model, std::uint64_t n,
                                                const std::vector<LipschitzTestFunction>& fs,
                                                const std::vector<double>& k_grid,
                                                std::uint64_t samples, std::uint64_t seed) {
  if (n == 0) throw DomainError("estimate_tail: need n >= 1");
  if (samples < 10000) throw DomainError("estimate_tail: need samples >= 1e4");
  if (fs.empty() || k_grid.empty()) throw DomainError("estimate_tail: empty function list or k grid");
  for (const auto& f : fs) {
    if (f.kind == LipschitzKind::LinearUnit && !f.direction.empty() && f.direction.size() != n) {
      throw DomainError("estimate_tail: direction length differs from n");
    }
  }
  const std::size_t half = samples / 2;
  const std::size_t rest = samples - half;
  const std::size_t half_blocks = (half + kMcBlock - 1) / kMcBlock;
  auto med_vals = detail::evaluate_blocks(model, n, fs, seed, 0, half);
  const auto tail_vals = detail::evaluate_blocks(model, n, fs, seed, half_blocks, rest);

  std::vector<TailRun> runs;
  for (std::size_t f = 0; f < fs.size(); ++f) {
    TailRun run;
    run.function = fs[f].label();
    auto& v = med_vals[f];
    std::sort(v.begin(), v.end());
    const double m = static_cast<double>(v.size());
    const std::size_t mid = v.size() / 2;
    run.median = v.size() % 2 == 1 ? v[mid] : 0.5 * (v[mid - 1] + v[mid]);
    const double w = kMedianZ * std::sqrt(m) / 2.0;
    const auto lo = static_cast<std::size_t>(std::max(0.0, std::floor(m / 2.0 - w)));
    const auto hi = static_cast<std::size_t>(std::min(m - 1.0, std::ceil(m / 2.0 + w)));
    run.median_delta = std::max(run.median - v[lo], v[hi] - run.median);
    run.median_samples = v.size();
    for (double k : k_grid) {
      TailEstimate e;
      e.k = k;
      e.n = n;
      e.samples = rest;
      for (double y : tail_vals[f]) {
        const double d = y - run.median;
        if (d > k) ++e.hits;
        if (std::abs(d) > k) ++e.hits_abs;
      }
      const double nn = static_cast<double>(rest);
      e.point = static_cast<double>(e.hits) / nn;
      e.point_abs = static_cast<double>(e.hits_abs) / nn;
      const BinomialInterval ci = clopper_pearson(e.hits, rest);
      const BinomialInterval ca = clopper_pearson(e.hits_abs, rest);
      e.ci_low = ci.low;
      e.ci_high = ci.high;
      e.ci_low_abs = ca.low;
      e.ci_high_abs = ca.high;
      run.estimates.push_back(e);
    }
    runs.push_back(std::move(run));
  }
  return runs;
}

inline TailRun estimate_tail(const MeasureModel& model, std::uint64_t n,
                             const LipschitzTestFunction& f, const std::vector<double>& k_grid,
                             std::uint64_t samples, std::uint64_t seed) {
  return estimate_tail_multi(model, n, {f}, k_grid, samples, seed).front();
}

// ---------------------------------------------------------------------------
// Bound versus estimate.

struct DominationRow {
  std::string route;
  std::string function;
  std::uint64_t n = 1;
  double k = 0.0;
  double k_eval = 0.0;  // max(0, k - median_delta)
  double bound = 1.0;
  bool vacuous = false;
  bool two_sided = false;
  double mc_point = 0.0;
  double mc_ci_low = 0.0;
  double mc_ci_high = 1.0;
  std::uint64_t samples = 0;
  bool dominates = true;  // bound >= mc_ci_low
};

/// Evaluates the bound at k - delta (median uncertainty) and compares it with
/// the lower confidence limit of the matching one- or two-sided estimate.
inline std::vector<DominationRow> compare_bound(const TailBound& bound, const TailRun& run) {
  std::vector<DominationRow> rows;
  for (const auto& e : run.estimates) {
    DominationRow r;
    r.route = bound.label;
    r.function = run.function;
    r.n = e.n;
    r.k = e.k;
    r.k_eval = std::max(0.0, e.k - run.median_delta);
    const TailValue v = bound.evaluate(r.k_eval);
    r.bound = v.value;
    r.vacuous = v.vacuous;
    r.two_sided = bound.two_sided;
    r.mc_point = bound.two_sided ? e.point_abs : e.point;
    r.mc_ci_low = bound.two_sided ? e.ci_low_abs : e.ci_low;
    r.mc_ci_high = bound.two_sided ? e.ci_high_abs : e.ci_high;
    r.samples = e.samples;
    r.dominates = r.bound >= r.mc_ci_low;
    rows.push_back(r);
  }
  return rows;
}

// ---------------------------------------------------------------------------
// Calibration of the free constants.

/// One reference cell: a model, a dimension and its runs (one per function).
struct ReferenceCell {
  MeasureModel model;
  std::uint64_t n = 1;
  std::vector<TailRun> runs;
};

struct ReferenceSpec {
  std::vector<std::string> measures{"power:3", "sexp:0.5"};
  std::vector<std::uint64_t> ns{1, 16, 256};
  std::vector<std::string> functions{"linear", "max"};
  std::vector<double> k_grid{1.0, 4.0, 16.0, 64.0};
  std::uint64_t samples = 1000000;
  std::uint64_t seed = 20240601;
};

inline std::vector<ReferenceCell> run_reference_matrix(const ReferenceSpec& spec) {
  std::vector<ReferenceCell> cells;
  for (const auto& desc : spec.measures) {
    const MeasureModel model = parse_measure(desc);
    for (std::uint64_t n : spec.ns) {
      std::vector<LipschitzTestFunction> fs;
      for (const auto& f : spec.functions) fs.push_back(parse_test_function(f, n));
      const std::uint64_t cell_seed =
          derive_seed(spec.seed, cells.size() + 1000u * static_cast<std::uint64_t>(n));
      cells.push_back({model, n,
                       estimate_tail_multi(model, n, fs, spec.k_grid, spec.samples, cell_seed)});
    }
  }
  return cells;
}

/// Fitted or derived constants, keyed by descriptor:
///   wp:<measure>            honest WP scale upper_C for beta_for_measure
///   malpha:C:<alpha>        C(alpha) of the m_alpha tail bound
///   nup:c:<p>               c_p of the nu_p tail bound
///   phi:c:<potential>       c_Phi of the potential bound
///   phi:ctilde:<potential>  c_Phi (B - 1), valid for the second form
///   phi:k:<potential>       k_Phi from the Hypothesis (H) check
///   product:C:<alpha>, product:c:<alpha>, product:t2:<alpha>
struct ConstantEntry {
  std::string key;
  double value = 1.0;
  std::string note;  // "fitted", "derived" or "default (no applicable point)"
};

/// Smallest multiplicative / largest rate constant such that each bound is
/// >= (1 + slack) ci_high at every applicable reference point (bounds
/// evaluated at k - delta, two-sided estimates).
inline std::vector<ConstantEntry> calibrate_constants(const std::vector<ReferenceCell>& cells,
                                                      double slack = 0.05) {
  std::map<std::string, ConstantEntry> table;  // references stay valid
  auto upsert = [&](const std::string& key) -> ConstantEntry& {
    ConstantEntry& e = table[key];
    e.key = key;
    return e;
  };
  for (const auto& cell : cells) {
    const MeasureModel& m = cell.model;
    ConstantEntry& wp = upsert("wp:" + m.descriptor());
    if (wp.note.empty()) {
      wp.value = calibrate_wp_scale(m, beta_for_measure(m));
      wp.note = "derived";
    }
    const double nn = static_cast<double>(cell.n);
    for (const auto& run : cell.runs) {
      for (const auto& e : run.estimates) {
        const double k = std::max(0.0, e.k - run.median_delta);
        const double target = (1.0 + slack) * e.ci_high_abs;
        if (!(k > 0.0)) continue;
        if (m.kind() == MeasureKind::PowerLaw) {
          const double alpha = m.parameter();
          ConstantEntry& c = upsert("malpha:C:" + format_double(alpha));
          const double t = k / std::pow(nn, 1.0 / alpha);
          if (t >= malpha_threshold(alpha)) {
            c.value = std::max(c.value, target / std::pow(std::log(t) / t, alpha));
            c.note = "fitted";
          }
        } else if (m.kind() == MeasureKind::StretchedExp) {
          const double p = m.parameter();
          ConstantEntry& c = upsert("nup:c:" + format_double(p));
          const NuPBound b = tail_bound_nup_detail(p, cell.n, k, 1.0);
          if (!b.vacuous && target < 10.0) {
            const double mx = std::max(std::pow(k, p), std::log(nn));
            const double v = std::log(10.0 / target) * std::pow(mx, 1.0 / p - 1.0) / k;
            c.value = c.note == "fitted" ? std::min(c.value, v) : v;
            c.note = "fitted";
          }
          const PotentialSpec spec = potential_power(p);
          const HypothesisReport h = check_hypothesis_H(spec);
          ConstantEntry& ck = upsert("phi:k:" + spec.name);
          ck.value = h.threshold;
          ck.note = "derived";
          ConstantEntry& cp = upsert("phi:c:" + spec.name);
          if (k >= h.threshold && target < 6.0) {
            const double y = std::max(spec.phi(k), 2.0 * std::log(nn));
            const double v = std::log(6.0 / target) / (k * spec.phi_prime(spec.phi_inverse(y)));
            cp.value = cp.note == "fitted" ? std::min(cp.value, v) : v;
            cp.note = "fitted";
          }
        }
      }
    }
  }
  std::vector<ConstantEntry> out;
  for (auto& [key, e] : table) {
    if (e.note.empty()) {
      e.value = 1.0;
      e.note = "default (no applicable point)";
    }
    out.push_back(e);
  }
  for (const auto& [key, e] : table) {
    if (key.rfind("phi:c:", 0) == 0) {
      const std::string name = key.substr(6);
      const HypothesisReport h = check_hypothesis_H(parse_potential(name));
      out.push_back({"phi:ctilde:" + name, e.value * (h.B_estimate - 1.0), "derived"});
    }
  }
  return out;
}

inline std::vector<ConstantEntry> product_set_constant_entries(double alpha, std::uint64_t n,
                                                               double a, double t_max) {
  const ProductSetConstants pc = calibrate_product_set_constants(alpha, n, a, t_max);
  const std::string tag = format_double(alpha);
  return {{"product:C:" + tag, pc.C, "fitted"},
          {"product:c:" + tag, pc.c, "fitted"},
          {"product:t2:" + tag, pc.t2, "derived"}};
}

/// Looks up a constant, or returns `fallback` when the key is absent.
inline double constant_or(const std::vector<ConstantEntry>& cs, const std::string& key,
                          double fallback) {
  for (const auto& e : cs) {
    if (e.key == key) return e.value;
  }
  return fallback;
}

/// Every TailBound route that applies to the model, with constants taken
/// from `cs` (defaults 1 for free constants, upper_C for the WP scale).
inline std::vector<TailBound> routes_for_model(const MeasureModel& m, std::uint64_t n,
                                               const std::vector<ConstantEntry>& cs,
                                               bool include_wang_zhang = true) {
  std::vector<TailBound> out;
  const double wp = constant_or(cs, "wp:" + m.descriptor(), kInf);
  const BetaFunction beta = beta_for_measure(m, std::isfinite(wp)
                                                    ? wp
                                                    : calibrate_wp_scale(m, beta_for_measure(m)));
  out.push_back(closed_form_route(beta, n));
  out.push_back(recursion_route(beta, n));
  out.push_back(theta_route(beta, n));
  if (include_wang_zhang) out.push_back(wang_zhang_route(beta, n));
  if (m.kind() == MeasureKind::PowerLaw) {
    const double alpha = m.parameter();
    out.push_back(malpha_route(alpha, n, constant_or(cs, "malpha:C:" + format_double(alpha), 1.0)));
  } else if (m.kind() == MeasureKind::StretchedExp) {
    const double p = m.parameter();
    out.push_back(nup_route(p, n, constant_or(cs, "nup:c:" + format_double(p), 1.0)));
    const PotentialSpec spec = potential_power(p);
    const double kphi = constant_or(cs, "phi:k:" + spec.name, kInf);
    out.push_back(phi_route(spec, n, constant_or(cs, "phi:c:" + spec.name, 1.0),
                            std::isfinite(kphi) ? kphi : check_hypothesis_H(spec).threshold));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Enlargement of the extremal product set.

struct EnlargementRow {
  double t = 0.0;
  double h = 0.0;                    // t n^{1/alpha}
  double exact_box = 0.0;            // R(R^{-1}(a^{1/n}) + h)^n
  double lower_bound = kInf;         // 1 - C (log t/t)^alpha, NaN below t2
  double upper_cap = kInf;           // 1 - c / t^alpha, NaN below t2
  double mc_euclid = 0.0;            // fraction with distance to A <= h
  double mc_ci_low = 0.0;
  double mc_ci_high = 1.0;
  bool applicable = false;           // t >= t2
  bool ordered = true;               // lower <= exact <= upper when applicable
};

struct EnlargementReport {
  double alpha = 0.0;
  std::uint64_t n = 1;
  double a = 0.5;
  double threshold = 0.0;  // R^{-1}(a^{1/n})
  double C = 0.0;
  double c = 0.0;
  double t2 = 0.0;
  std::vector<EnlargementRow> rows;
};

inline EnlargementReport enlargement_experiment(double alpha, std::uint64_t n, double a,
                                                const std::vector<double>& t_grid,
                                                std::uint64_t seed, double C, double c,
                                                std::uint64_t samples = 100000) {
  if (!(a >= 0.5 && a < 1.0)) throw DomainError("enlargement_experiment: need 1/2 <= a < 1");
  if (samples < 10000) throw DomainError("enlargement_experiment: need samples >= 1e4");
  EnlargementReport rep;
  rep.alpha = alpha;
  rep.n = n;
  rep.a = a;
  rep.C = C;
  rep.c = c;
  rep.t2 = malpha_threshold(alpha);
  rep.threshold = detail::malpha_quantile_log(alpha, std::log(a) / static_cast<double>(n));
  const MeasureModel model = make_power_law(alpha);
  const auto dist = detail::evaluate_blocks(model, n, {distance_to_product_set(rep.threshold)},
                                            seed, 0, samples)
                        .front();
  const double root = std::pow(static_cast<double>(n), 1.0 / alpha);
  for (double t : t_grid) {
    if (!(t >= 0.0)) throw DomainError("enlargement_experiment: need t >= 0");
    EnlargementRow r;
    r.t = t;
    r.h = t * root;
    r.exact_box = product_set_enlargement_exact(alpha, n, a, r.h);
    r.applicable = t >= rep.t2;
    r.lower_bound = r.applicable ? 1.0 - C * std::pow(std::log(t) / t, alpha) : std::nan("");
    r.upper_cap = r.applicable ? 1.0 - c / std::pow(t, alpha) : std::nan("");
    std::uint64_t inside = 0;
    for (double d : dist) {
      if (d <= r.h) ++inside;
    }
    r.mc_euclid = static_cast<double>(inside) / static_cast<double>(samples);
    const BinomialInterval ci = clopper_pearson(inside, samples);
    r.mc_ci_low = ci.low;
    r.mc_ci_high = ci.high;
    r.ordered = !r.applicable || (r.lower_bound <= r.exact_box && r.exact_box <= r.upper_cap);
    rep.rows.push_back(r);
  }
  return rep;
}

}  // namespace heavyconc

#pragma once

// Batch front end: RunConfig, config and constants files, CSV / JSON-lines
// tables and the subcommands. tools/heavyconc_main.cpp only parses flags.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "json.hpp"

#include "heavyconc/beta.hpp"
#include "heavyconc/capacity.hpp"
#include "heavyconc/concentration.hpp"
#include "heavyconc/errors.hpp"
#include "heavyconc/format.hpp"
#include "heavyconc/isoperimetry.hpp"
#include "heavyconc/measures.hpp"
#include "heavyconc/montecarlo.hpp"
#include "heavyconc/weak_poincare.hpp"

#ifndef HEAVYCONC_VERSION_STRING
#define HEAVYCONC_VERSION_STRING "0.0.0"
#endif

namespace heavyconc {

inline constexpr const char* kVersion = HEAVYCONC_VERSION_STRING;

enum class Command { Profile, Capacity, Beta, Bound, Theta, Mc, Enlarge, CheckH, Calibrate };

inline const char* to_string(Command c) {
  switch (c) {
    case Command::Profile: return "profile";
    case Command::Capacity: return "capacity";
    case Command::Beta: return "beta";
    case Command::Bound: return "bound";
    case Command::Theta: return "theta";
    case Command::Mc: return "mc";
    case Command::Enlarge: return "enlarge";
    case Command::CheckH: return "check-h";
    case Command::Calibrate: return "calibrate";
  }
  return "?";
}

inline Command parse_command(std::string_view name) {
  for (Command c : {Command::Profile, Command::Capacity, Command::Beta, Command::Bound,
                    Command::Theta, Command::Mc, Command::Enlarge, Command::CheckH,
                    Command::Calibrate}) {
    if (name == to_string(c)) return c;
  }
  throw ParseError("command: unknown subcommand '" + std::string(name) + "'");
}

/// Empty strings and lists mean "command default"; see resolve_defaults.
struct RunConfig {
  Command command = Command::Profile;
  std::string measure;                 // calibrate: comma-separated list
  std::string beta;                    // empty: beta_for_measure(measure)
  std::vector<std::uint64_t> n_list;
  std::vector<double> grid;            // t, s, k or u depending on command
  std::uint64_t samples = 0;
  std::uint64_t seed = 1;
  std::string constants_path;
  std::string output_path;             // "-" or empty: default location
  bool jsonl = false;
  std::vector<std::string> routes;     // empty: every applicable route
  std::vector<std::string> functions;  // Monte Carlo test functions
  std::optional<double> c_eR;
  double a = 0.5;
  std::size_t capacity_grid = 256;
  double slack = 0.05;
};

namespace detail {

inline std::string join(const std::vector<std::string>& v, char sep = ',') {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += sep;
    out += v[i];
  }
  return out;
}

template <class T>
std::string join_numbers(const std::vector<T>& v) {
  std::vector<std::string> s;
  for (const T& x : v) {
    if constexpr (std::is_floating_point_v<T>) {
      s.push_back(format_double(x));
    } else {
      s.push_back(std::to_string(x));
    }
  }
  return join(s);
}

inline std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  for (auto& item : split(text, ',')) {
    std::string t = trim(item);
    if (!t.empty()) out.push_back(std::move(t));
  }
  return out;
}

inline std::uint64_t parse_count(const std::string& text, const std::string& key) {
  const double v = parse_double(text, key);
  if (!(v >= 0.0) || v != std::floor(v) || v > 1.8e19) {
    throw ParseError(key + ": expected a nonnegative integer, got '" + text + "'");
  }
  return static_cast<std::uint64_t>(v);
}

inline bool parse_bool(const std::string& text, const std::string& key) {
  const std::string t = trim(text);
  if (t == "1" || t == "true" || t == "yes" || t == "on") return true;
  if (t == "0" || t == "false" || t == "no" || t == "off") return false;
  throw ParseError(key + ": expected a boolean, got '" + text + "'");
}

}  // namespace detail

/// Sets one config key. Errors name the key.
inline void set_config_key(RunConfig& cfg, const std::string& key, const std::string& raw) {
  const std::string value = trim(raw);
  try {
    if (key == "command") {
      cfg.command = parse_command(value);
    } else if (key == "measure") {
      cfg.measure = value;
    } else if (key == "beta") {
      cfg.beta = value;
    } else if (key == "n") {
      cfg.n_list.clear();
      for (const auto& s : detail::split_list(value)) {
        cfg.n_list.push_back(detail::parse_count(s, key));
      }
    } else if (key == "grid") {
      cfg.grid.clear();
      for (const auto& s : detail::split_list(value)) cfg.grid.push_back(parse_double(s, key));
    } else if (key == "samples") {
      cfg.samples = detail::parse_count(value, key);
    } else if (key == "seed") {
      cfg.seed = detail::parse_count(value, key);
    } else if (key == "constants") {
      cfg.constants_path = value;
    } else if (key == "output") {
      cfg.output_path = value;
    } else if (key == "jsonl") {
      cfg.jsonl = detail::parse_bool(value, key);
    } else if (key == "routes") {
      cfg.routes = detail::split_list(value);
    } else if (key == "functions") {
      cfg.functions = detail::split_list(value);
    } else if (key == "c_eR") {
      cfg.c_eR = parse_double(value, key);
    } else if (key == "a") {
      cfg.a = parse_double(value, key);
    } else if (key == "capacity_grid") {
      cfg.capacity_grid = detail::parse_count(value, key);
    } else if (key == "slack") {
      cfg.slack = parse_double(value, key);
    } else {
      throw ParseError("unknown config key '" + key + "'");
    }
  } catch (const ParseError& e) {
    const std::string msg = e.what();
    if (msg.rfind(key, 0) == 0 || msg.rfind("unknown config key", 0) == 0) throw;
    throw ParseError(key + ": " + msg);
  }
}

/// key = value lines, '#' comments. Later keys override earlier ones and
/// everything overrides command-line flags.
inline void apply_config_text(RunConfig& cfg, std::string_view text, std::string_view origin) {
  std::size_t line_no = 0;
  for (const auto& line : split(text, '\n')) {
    ++line_no;
    std::string body = line.substr(0, line.find('#'));
    body = trim(body);
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos) {
      throw ParseError(std::string(origin) + ":" + std::to_string(line_no) +
                       ": expected 'key = value'");
    }
    set_config_key(cfg, trim(body.substr(0, eq)), body.substr(eq + 1));
  }
}

inline void apply_config_file(RunConfig& cfg, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("config: cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  apply_config_text(cfg, ss.str(), path);
}

// ---------------------------------------------------------------------------
// Constants file: one "descriptor = value" per line.

inline std::vector<ConstantEntry> parse_constants(std::string_view text, std::string_view origin) {
  std::vector<ConstantEntry> out;
  std::size_t line_no = 0;
  for (const auto& line : split(text, '\n')) {
    ++line_no;
    const std::string body = trim(line.substr(0, line.find('#')));
    if (body.empty()) continue;
    const auto eq = body.find('=');
    const std::string where = std::string(origin) + ":" + std::to_string(line_no);
    if (eq == std::string::npos) throw ParseError(where + ": expected 'descriptor = value'");
    const std::string key = trim(body.substr(0, eq));
    if (key.empty()) throw ParseError(where + ": empty descriptor");
    out.push_back({key, parse_double(body.substr(eq + 1), key), "file"});
  }
  return out;
}

inline std::vector<ConstantEntry> read_constants(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("constants: cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_constants(ss.str(), path);
}

inline std::string format_constants(const std::vector<ConstantEntry>& cs,
                                    const std::string& header) {
  std::ostringstream os;
  os << "# heavyconc " << kVersion << "\n";
  if (!header.empty()) os << "# " << header << "\n";
  for (const auto& e : cs) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", e.value);
    os << e.key << " = " << buf;
    if (!e.note.empty()) os << "  # " << e.note;
    os << "\n";
  }
  return os.str();
}

// ---------------------------------------------------------------------------
// Tables.

/// Statuses that make the run exit nonzero.
inline bool is_failure_status(std::string_view s) {
  return s == "diverges" || s == "unstable" || s == "violation" || s == "error";
}

class Table {
 public:
  using Cell = std::variant<std::monostate, double, std::int64_t, std::string, bool>;

  explicit Table(std::vector<std::string> columns) : columns_(std::move(columns)) {
    columns_.push_back("status");
  }

  void add(std::vector<Cell> cells, std::string status) {
    if (cells.size() + 1 != columns_.size()) {
      throw DomainError("Table::add: expected " + std::to_string(columns_.size() - 1) +
                        " cells");
    }
    if (is_failure_status(status)) ++failures_;
    cells.emplace_back(std::move(status));
    rows_.push_back(std::move(cells));
  }
  void warn(std::string message) { warnings_.push_back(std::move(message)); }

  std::size_t failures() const { return failures_; }
  std::size_t size() const { return rows_.size(); }
  const std::vector<std::string>& columns() const { return columns_; }
  const std::vector<std::string>& warnings() const { return warnings_; }
  const std::vector<std::vector<Cell>>& rows() const { return rows_; }

  void write_csv(std::ostream& os, const std::string& config_line, std::uint64_t seed) const {
    os << "# heavyconc " << kVersion << "\n";
    os << "# config: " << config_line << "\n";
    os << "# seed: " << seed << "\n";
    for (const auto& w : warnings_) os << "# WARNING: " << w << "\n";
    os << detail::join(columns_) << "\n";
    for (const auto& row : rows_) {
      for (std::size_t i = 0; i < row.size(); ++i) {
        if (i) os << ',';
        os << csv_cell(row[i]);
      }
      os << "\n";
    }
  }

  void write_jsonl(std::ostream& os, const std::string& config_line, std::uint64_t seed) const {
    nlohmann::ordered_json head;
    head["heavyconc"] = kVersion;
    head["config"] = config_line;
    head["seed"] = seed;
    os << head.dump() << "\n";
    for (const auto& w : warnings_) os << nlohmann::ordered_json{{"warning", w}}.dump() << "\n";
    for (const auto& row : rows_) {
      nlohmann::ordered_json j;
      for (std::size_t i = 0; i < row.size(); ++i) j[columns_[i]] = json_cell(row[i]);
      os << j.dump() << "\n";
    }
  }

 private:
  static std::string csv_cell(const Cell& c) {
    if (std::holds_alternative<double>(c)) {
      const double v = std::get<double>(c);
      if (std::isnan(v)) return "nan";
      if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
      return format_double(v);
    }
    if (std::holds_alternative<std::int64_t>(c)) return std::to_string(std::get<std::int64_t>(c));
    if (std::holds_alternative<bool>(c)) return std::get<bool>(c) ? "true" : "false";
    if (std::holds_alternative<std::string>(c)) return std::get<std::string>(c);
    return "";
  }
  static nlohmann::ordered_json json_cell(const Cell& c) {
    if (std::holds_alternative<double>(c)) {
      const double v = std::get<double>(c);
      if (std::isfinite(v)) return std::stod(format_double(v));
      return std::isnan(v) ? nlohmann::ordered_json() : nlohmann::ordered_json(csv_cell(c));
    }
    if (std::holds_alternative<std::int64_t>(c)) return std::get<std::int64_t>(c);
    if (std::holds_alternative<bool>(c)) return std::get<bool>(c);
    if (std::holds_alternative<std::string>(c)) return std::get<std::string>(c);
    return nullptr;
  }

  std::vector<std::string> columns_;
  std::vector<std::vector<Cell>> rows_;
  std::vector<std::string> warnings_;
  std::size_t failures_ = 0;
};

// ---------------------------------------------------------------------------
// Defaults and validation.

namespace detail {

inline std::vector<double> log_grid(double lo, double hi, int points) {
  std::vector<double> g;
  for (int i = 0; i < points; ++i) {
    g.push_back(lo * std::pow(hi / lo, static_cast<double>(i) / (points - 1)));
  }
  return g;
}

inline std::vector<double> sorted_unique(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

inline std::int64_t as_int(std::uint64_t v) { return static_cast<std::int64_t>(v); }

}  // namespace detail

/// Fills command defaults and checks the invariants: descriptors parse,
/// grids non-empty and sorted. Throws ParseError naming the key.
inline RunConfig resolve_defaults(RunConfig cfg) {
  const Command c = cfg.command;
  if (cfg.measure.empty()) {
    cfg.measure = c == Command::Calibrate ? "power:3,sexp:0.5"
                  : c == Command::CheckH  ? "sexp:0.5"
                  : c == Command::Enlarge ? "power:2"
                                          : "power:1";
  }
  if (cfg.n_list.empty()) {
    cfg.n_list = c == Command::Calibrate ? std::vector<std::uint64_t>{1, 16, 256}
                 : c == Command::Enlarge ? std::vector<std::uint64_t>{100}
                                         : std::vector<std::uint64_t>{1};
  }
  if (cfg.functions.empty()) cfg.functions = {"linear", "max"};
  if (cfg.samples == 0) cfg.samples = c == Command::Calibrate ? 1000000 : 100000;
  if (cfg.grid.empty()) {
    switch (c) {
      case Command::Profile: {
        auto g = detail::log_grid(1e-6, 0.5, 25);
        g.push_back(0.1);
        g.push_back(0.25);
        g.push_back(0.75);
        g.push_back(0.9);
        cfg.grid = detail::sorted_unique(g);
        break;
      }
      case Command::Beta:
        cfg.grid = detail::log_grid(1e-8, 0.2, 17);
        break;
      case Command::Theta:
        cfg.grid = detail::log_grid(1.0, 1e4, 17);
        break;
      case Command::Bound:
        cfg.grid = detail::log_grid(1.0, 1e3, 13);
        break;
      case Command::Mc:
      case Command::Calibrate:
        cfg.grid = {1.0, 4.0, 16.0, 64.0};
        break;
      case Command::Enlarge:
        cfg.grid = {0.0, 1.0, 2.0, 4.0, 8.0, 10.0, 12.0, 14.0, 16.0, 18.0, 20.0};
        break;
      case Command::Capacity:
      case Command::CheckH:
        break;
    }
  }
  if (!std::is_sorted(cfg.grid.begin(), cfg.grid.end())) {
    throw ParseError("grid: values must be sorted ascending");
  }
  for (double v : cfg.grid) {
    if (!std::isfinite(v)) throw ParseError("grid: values must be finite");
  }
  if (!std::is_sorted(cfg.n_list.begin(), cfg.n_list.end())) {
    throw ParseError("n: values must be sorted ascending");
  }
  for (auto n : cfg.n_list) {
    if (n == 0) throw ParseError("n: dimensions must be >= 1");
  }
  auto check = [](const std::string& key, auto&& fn) {
    try {
      fn();
    } catch (const std::exception& e) {
      throw ParseError(key + ": " + e.what());
    }
  };
  if (c != Command::CheckH) {
    for (const auto& m : detail::split_list(cfg.measure)) {
      check("measure", [&] { parse_measure(m); });
    }
  }
  if (!cfg.beta.empty()) check("beta", [&] { parse_beta(cfg.beta); });
  for (const auto& r : cfg.routes) check("routes", [&] { parse_tail_route(r); });
  for (const auto& f : cfg.functions) check("functions", [&] { parse_test_function(f, 1); });
  if (cfg.c_eR && !(*cfg.c_eR > 0.0)) throw ParseError("c_eR: must be positive");
  if (!(cfg.slack >= 0.0)) throw ParseError("slack: must be nonnegative");
  if (cfg.capacity_grid < 8) throw ParseError("capacity_grid: must be >= 8");
  return cfg;
}

/// Canonical one-line rendering of everything that determines the output.
/// The output location is left out so that reruns compare byte for byte.
inline std::string config_line(const RunConfig& cfg) {
  std::ostringstream os;
  os << "command=" << to_string(cfg.command) << " measure=" << cfg.measure
     << " beta=" << cfg.beta << " n=" << detail::join_numbers(cfg.n_list)
     << " grid=" << detail::join_numbers(cfg.grid) << " samples=" << cfg.samples
     << " seed=" << cfg.seed << " constants=" << cfg.constants_path
     << " routes=" << detail::join(cfg.routes) << " functions=" << detail::join(cfg.functions)
     << " c_eR=" << (cfg.c_eR ? format_double(*cfg.c_eR) : std::string("unset"))
     << " a=" << format_double(cfg.a) << " capacity_grid=" << cfg.capacity_grid
     << " slack=" << format_double(cfg.slack);
  return os.str();
}

// ---------------------------------------------------------------------------
// Subcommands. Each fills a Table; numerical trouble becomes a status.

namespace detail {

inline std::vector<ConstantEntry> load_constants(const RunConfig& cfg) {
  return cfg.constants_path.empty() ? std::vector<ConstantEntry>{}
                                    : read_constants(cfg.constants_path);
}

inline BetaFunction config_beta(const RunConfig& cfg, const MeasureModel& m,
                                const std::vector<ConstantEntry>& cs) {
  if (!cfg.beta.empty()) return parse_beta(cfg.beta);
  return beta_for_measure(m, constant_or(cs, "wp:" + m.descriptor(), 1.0));
}

inline std::string sup_status(const CriterionSup& s) {
  if (s.divergent) return "diverges";
  return s.stable ? "ok" : "unstable";
}

inline PotentialSpec config_potential(const std::string& measure) {
  const auto parts = split(measure, ':');
  if (parts[0] == "sexp" && parts.size() == 2) {
    return potential_power(parse_double(parts[1], "measure"));
  }
  if (parts[0] == "potential" && parts.size() >= 2) return parse_potential(measure.substr(10));
  if (parts[0] == "power") {
    throw ParseError("measure: check-h needs a potential or sexp measure, got '" + measure +
                     "'");
  }
  return parse_potential(measure);
}

inline Table cmd_profile(const RunConfig& cfg) {
  const MeasureModel m = parse_measure(cfg.measure);
  const IsoProfile iso(m);
  const auto cs = load_constants(cfg);
  const BetaFunction beta = config_beta(cfg, m, cs);
  Table t({"n", "t", "I", "product_upper", "product_upper_asymptotic", "lower_bound"});
  const double c_eR = cfg.c_eR.value_or(1.0);
  if (!cfg.c_eR) t.warn("c_eR not supplied; lower_bound uses c_eR = 1");
  for (auto n : cfg.n_list) {
    for (double x : cfg.grid) {
      if (!(x > 0.0 && x < 1.0)) {
        t.add({as_int(n), x, {}, {}, {}, {}}, "error");
        continue;
      }
      try {
        const double asym = static_cast<double>(n) >= iso_asymptotic_threshold(x)
                                ? iso_product_upper_bound_asymptotic(iso, n, x)
                                : std::nan("");
        t.add({as_int(n), x, iso.profile(x), iso_product_upper_bound(iso, n, x), asym,
               iso_lower_bound(beta, n, c_eR, x)},
              "ok");
      } catch (const std::exception&) {
        t.add({as_int(n), x, {}, {}, {}, {}}, "error");
      }
    }
  }
  return t;
}

inline Table cmd_capacity(const RunConfig& cfg) {
  const MeasureModel m = parse_measure(cfg.measure);
  const auto cs = load_constants(cfg);
  const BetaFunction beta = config_beta(cfg, m, cs);
  Table t({"section", "name", "tail_mass", "x", "value", "value_n", "value_2n", "value_4n"});
  CriterionOptions opts;
  opts.grid = cfg.capacity_grid;
  const CriterionConstants cc = compute_criterion_constants(m, beta, opts);
  const std::pair<const char*, const CriterionSup*> sups[] = {
      {"b-", &cc.b_minus}, {"b+", &cc.b_plus}, {"B-", &cc.B_minus}, {"B+", &cc.B_plus}};
  for (const auto& [name, s] : sups) {
    t.add({std::string("criterion"), std::string(name), s->tail_mass, {}, s->value, s->value_n,
           s->value_2n, s->value_4n},
          sup_status(*s));
  }
  const std::string summary = !cc.finite() ? "diverges" : cc.stable() ? "ok" : "unstable";
  t.add({std::string("criterion"), std::string("lower_C"), {}, {}, cc.lower_C, {}, {}, {}},
        summary);
  t.add({std::string("criterion"), std::string("upper_C"), {}, {}, cc.upper_C, {}, {}, {}},
        summary);
  const CapacityLowerBoundReport rep = check_capacity_lower_bound(m, beta, cfg.capacity_grid);
  for (const auto& r : rep.rows) {
    t.add({std::string("ratio"), std::string(to_string(r.side)), r.tail_mass, r.x, r.ratio,
           r.capacity, {}, {}},
          "ok");
  }
  t.add({std::string("ratio"), std::string("min_ratio"), {}, {}, rep.min_ratio, {},
         rep.min_ratio_doubled, {}},
        rep.stable ? "ok" : "unstable");
  return t;
}

inline Table cmd_beta(const RunConfig& cfg) {
  const MeasureModel m = parse_measure(cfg.measure);
  const auto cs = load_constants(cfg);
  const BetaFunction beta = config_beta(cfg, m, cs);
  Table t({"n", "s", "beta", "descriptor"});
  for (auto n : cfg.n_list) {
    const BetaFunction bn = tensorise_beta(beta, n);
    for (double s : cfg.grid) {
      if (!(s > 0.0)) {
        t.add({as_int(n), s, {}, bn.descriptor()}, "error");
        continue;
      }
      const double v = bn.eval(s);
      t.add({as_int(n), s, v, bn.descriptor()},
            !std::isfinite(v) ? "error" : bn.clamped(s) ? "clamped" : "ok");
    }
  }
  return t;
}

inline Table cmd_bound(const RunConfig& cfg) {
  const MeasureModel m = parse_measure(cfg.measure);
  const auto cs = load_constants(cfg);
  Table t({"route", "n", "k", "bound", "two_sided", "vacuous"});
  std::set<std::string> wanted(cfg.routes.begin(), cfg.routes.end());
  for (auto n : cfg.n_list) {
    std::vector<TailBound> routes;
    if (cfg.beta.empty()) {
      routes = routes_for_model(m, n, cs);
    } else {
      const BetaFunction b = parse_beta(cfg.beta);
      routes = {closed_form_route(b, n), recursion_route(b, n), theta_route(b, n),
                wang_zhang_route(b, n)};
    }
    if (m.kind() == MeasureKind::PowerLaw) routes.push_back(product_set_route(m.parameter(), n, cfg.a));
    for (const auto& r : routes) {
      if (!wanted.empty() && !wanted.count(to_string(r.route))) continue;
      for (double k : cfg.grid) {
        try {
          const TailValue v = r.evaluate(k);
          t.add({r.label, as_int(n), k, v.value, r.two_sided, v.vacuous},
                v.vacuous ? "vacuous" : "ok");
        } catch (const std::exception&) {
          t.add({r.label, as_int(n), k, {}, r.two_sided, {}}, "error");
        }
      }
    }
  }
  return t;
}

inline Table cmd_theta(const RunConfig& cfg) {
  const MeasureModel m = parse_measure(cfg.measure);
  const auto cs = load_constants(cfg);
  const BetaFunction beta = config_beta(cfg, m, cs);
  Table t({"n", "u", "theta", "six_theta", "vacuous"});
  for (auto n : cfg.n_list) {
    const BetaFunction bn = tensorise_beta(beta, n);
    for (double u : cfg.grid) {
      try {
        const ThetaResult r = theta_detail(bn, u);
        t.add({as_int(n), u, r.value, std::min(1.0, 6.0 * r.value), r.vacuous},
              r.vacuous ? "vacuous" : "ok");
      } catch (const std::exception&) {
        t.add({as_int(n), u, {}, {}, {}}, "error");
      }
    }
  }
  return t;
}

inline Table cmd_mc(const RunConfig& cfg) {
  const MeasureModel m = parse_measure(cfg.measure);
  Table t({"function", "n", "k", "median", "median_delta", "samples", "hits", "point", "ci_low",
           "ci_high", "hits_abs", "point_abs", "ci_low_abs", "ci_high_abs"});
  for (auto n : cfg.n_list) {
    std::vector<LipschitzTestFunction> fs;
    for (const auto& f : cfg.functions) fs.push_back(parse_test_function(f, n));
    const auto runs = estimate_tail_multi(m, n, fs, cfg.grid, cfg.samples,
                                          derive_seed(cfg.seed, n));
    for (const auto& run : runs) {
      for (const auto& e : run.estimates) {
        t.add({run.function, as_int(n), e.k, run.median, run.median_delta,
               as_int(e.samples), as_int(e.hits), e.point, e.ci_low, e.ci_high,
               as_int(e.hits_abs), e.point_abs, e.ci_low_abs, e.ci_high_abs},
              "ok");
      }
    }
  }
  return t;
}

inline Table cmd_enlarge(const RunConfig& cfg) {
  const MeasureModel m = parse_measure(cfg.measure);
  if (m.kind() != MeasureKind::PowerLaw) {
    throw ParseError("measure: enlarge needs a power:alpha measure");
  }
  const double alpha = m.parameter();
  const auto cs = load_constants(cfg);
  Table t({"n", "t", "h", "exact_box", "lower_bound", "upper_cap", "mc_euclid", "mc_ci_low",
           "mc_ci_high", "applicable"});
  const std::string tag = format_double(alpha);
  for (auto n : cfg.n_list) {
    double C = constant_or(cs, "product:C:" + tag, kInf);
    double c = constant_or(cs, "product:c:" + tag, kInf);
    if (!std::isfinite(C) || !std::isfinite(c)) {
      const ProductSetConstants pc =
          calibrate_product_set_constants(alpha, n, cfg.a, std::max(cfg.grid.back(), 2 * malpha_threshold(alpha)));
      C = pc.C;
      c = pc.c;
      t.warn("product constants not in constants file; fitted for n=" + std::to_string(n) +
             ": C=" + format_double(C) + " c=" + format_double(c));
    }
    const EnlargementReport rep =
        enlargement_experiment(alpha, n, cfg.a, cfg.grid, derive_seed(cfg.seed, n), C, c,
                               cfg.samples);
    for (const auto& r : rep.rows) {
      const bool bad = !r.ordered || r.mc_ci_low > r.exact_box;
      t.add({as_int(n), r.t, r.h, r.exact_box, r.lower_bound, r.upper_cap, r.mc_euclid,
             r.mc_ci_low, r.mc_ci_high, r.applicable},
            bad ? "violation" : "ok");
    }
  }
  return t;
}

inline Table cmd_check_h(const RunConfig& cfg) {
  const PotentialSpec spec = config_potential(cfg.measure);
  const HypothesisReport r = check_hypothesis_H(spec);
  Table t({"item", "x", "value", "rhs"});
  auto flag = [&](const char* name, bool ok) {
    t.add({std::string(name), {}, ok, {}}, ok ? "ok" : "fails");
  };
  flag("passes", r.passes);
  t.add({std::string("B_estimate"), {}, r.B_estimate, {}}, "ok");
  t.add({std::string("C_estimate"), {}, r.C_estimate, {}}, "ok");
  flag("doubling", r.doubling);
  flag("curvature_finite", r.curvature_finite);
  flag("concave", r.concave);
  flag("chain_holds", r.chain_holds);
  t.add({std::string("B_prime"), {}, r.B_prime, {}}, "ok");
  t.add({std::string("B_second"), {}, r.B_second, {}}, "ok");
  flag("eq2_holds", r.eq2_holds);
  flag("eq3_holds", r.eq3_holds);
  t.add({std::string("threshold"), {}, r.threshold, {}}, "ok");
  t.add({std::string("x_lo"), {}, r.x_lo, {}}, "ok");
  t.add({std::string("x_hi"), {}, r.x_hi, {}}, "ok");
  for (const auto& w : r.witnesses) {
    t.add({"witness:" + w.check, w.x, w.lhs, w.rhs}, "fails");
  }
  return t;
}

struct CalibrationOutput {
  Table table;
  std::vector<ConstantEntry> constants;
};

inline CalibrationOutput cmd_calibrate(const RunConfig& cfg) {
  ReferenceSpec spec;
  spec.measures = split_list(cfg.measure);
  spec.ns = cfg.n_list;
  spec.functions = cfg.functions;
  spec.k_grid = cfg.grid;
  spec.samples = cfg.samples;
  spec.seed = cfg.seed;
  const auto cells = run_reference_matrix(spec);
  auto cs = calibrate_constants(cells, cfg.slack);
  for (const auto& desc : spec.measures) {
    const MeasureModel m = parse_measure(desc);
    if (m.kind() != MeasureKind::PowerLaw) continue;
    for (auto& e : product_set_constant_entries(m.parameter(), 100, 0.5, 20.0)) {
      cs.push_back(std::move(e));
    }
  }
  Table t({"measure", "n", "route", "function", "k", "k_eval", "bound", "mc_ci_low",
           "mc_ci_high", "dominates"});
  for (const auto& cell : cells) {
    for (const auto& tb : routes_for_model(cell.model, cell.n, cs)) {
      for (const auto& run : cell.runs) {
        for (const auto& row : compare_bound(tb, run)) {
          t.add({cell.model.descriptor(), as_int(cell.n), row.route, row.function, row.k,
                 row.k_eval, row.bound, row.mc_ci_low, row.mc_ci_high, row.dominates},
                row.dominates ? (row.vacuous ? "vacuous" : "ok") : "violation");
        }
      }
    }
  }
  return {std::move(t), std::move(cs)};
}

inline std::string default_output_dir() {
  const char* env = std::getenv("HEAVYCONC_OUTPUT_DIR");
  return env && *env ? std::string(env) : std::string();
}

inline void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParseError("output: cannot write '" + path + "'");
  out << text;
}

}  // namespace detail

struct RunResult {
  int exit_code = 0;
  std::size_t rows = 0;
  std::size_t failures = 0;
  std::vector<std::string> files;  // written paths
};

/// Runs one subcommand. Output goes to cfg.output_path, or to
/// $HEAVYCONC_OUTPUT_DIR/<command>.csv when unset and the variable is set,
/// otherwise to `out`. With jsonl a <path>.jsonl mirror is written next to
/// the CSV; on `out` the JSON lines replace the CSV. Exit code 0 iff no row
/// carries a failure status.
inline RunResult run(const RunConfig& raw, std::ostream& out, std::ostream& err) {
  const RunConfig cfg = resolve_defaults(raw);
  std::optional<Table> table;
  std::vector<ConstantEntry> constants;
  switch (cfg.command) {
    case Command::Profile: table = detail::cmd_profile(cfg); break;
    case Command::Capacity: table = detail::cmd_capacity(cfg); break;
    case Command::Beta: table = detail::cmd_beta(cfg); break;
    case Command::Bound: table = detail::cmd_bound(cfg); break;
    case Command::Theta: table = detail::cmd_theta(cfg); break;
    case Command::Mc: table = detail::cmd_mc(cfg); break;
    case Command::Enlarge: table = detail::cmd_enlarge(cfg); break;
    case Command::CheckH: table = detail::cmd_check_h(cfg); break;
    case Command::Calibrate: {
      auto res = detail::cmd_calibrate(cfg);
      table = std::move(res.table);
      constants = std::move(res.constants);
      break;
    }
  }
  RunResult result;
  const std::string line = config_line(cfg);
  std::string path = cfg.output_path == "-" ? std::string() : cfg.output_path;
  const std::string dir = detail::default_output_dir();
  if (cfg.output_path.empty() && !dir.empty()) {
    path = dir + "/" + to_string(cfg.command) + ".csv";
  }
  for (const auto& w : table->warnings()) err << "WARNING: " << w << "\n";
  if (path.empty()) {
    if (cfg.jsonl) {
      table->write_jsonl(out, line, cfg.seed);
    } else {
      table->write_csv(out, line, cfg.seed);
    }
  } else {
    std::ostringstream csv;
    table->write_csv(csv, line, cfg.seed);
    detail::write_text(path, csv.str());
    result.files.push_back(path);
    if (cfg.jsonl) {
      std::ostringstream js;
      table->write_jsonl(js, line, cfg.seed);
      detail::write_text(path + ".jsonl", js.str());
      result.files.push_back(path + ".jsonl");
    }
  }
  if (cfg.command == Command::Calibrate) {
    std::string cpath = cfg.constants_path;
    if (cpath.empty()) cpath = (dir.empty() ? std::string(".") : dir) + "/constants.txt";
    detail::write_text(cpath, format_constants(constants, "config: " + line));
    result.files.push_back(cpath);
  }
  result.rows = table->size();
  result.failures = table->failures();
  result.exit_code = result.failures == 0 ? 0 : 1;
  return result;
}

}  // namespace heavyconc

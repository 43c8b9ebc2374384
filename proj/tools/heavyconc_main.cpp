#include <iostream>
#include <map>
#include <string>

#include "CLI11.hpp"

#include "heavyconc/cli.hpp"

namespace {

struct Flags {
  std::map<std::string, std::string> values;  // config key -> raw text
  bool jsonl = false;
  std::string config_path;
};

void add_shared(CLI::App* sub, Flags& f) {
  auto str = [&](const std::string& names, const std::string& key, const std::string& help) {
    sub->add_option_function<std::string>(
        names, [&f, key](const std::string& v) { f.values[key] = v; }, help);
  };
  sub->add_option_function<std::string>(
      "measure", [&f](const std::string& v) { f.values["measure"] = v; },
      "Measure descriptor: power:a, sexp:p, potential:...");
  str("--beta", "beta", "Beta descriptor, default: the measure's own");
  str("-n,--n", "n", "Comma-separated dimensions");
  str("--grid,--t,--s,--k,--u", "grid", "Comma-separated grid (t, s, k or u)");
  str("--samples", "samples", "Monte Carlo sample count");
  str("--seed", "seed", "Master seed");
  str("--constants", "constants", "Constants file (read; calibrate writes it)");
  str("-o,--output", "output", "Output CSV path, '-' for stdout");
  str("--routes", "routes", "Comma-separated tail-bound routes");
  str("--functions", "functions", "Monte Carlo test functions");
  str("--c-eR", "c_eR", "Curvature-dimension constant for the isoperimetric lower bound");
  str("--a", "a", "Product-set mass");
  str("--capacity-grid", "capacity_grid", "Criterion grid size N");
  str("--slack", "slack", "Calibration slack");
  sub->add_flag("--jsonl", f.jsonl, "Also write a JSON-lines mirror");
  sub->add_option("--config", f.config_path, "key = value file; overrides flags");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"heavyconc: concentration and isoperimetry for heavy-tailed product measures"};
  app.set_version_flag("--version", std::string(heavyconc::kVersion));
  app.require_subcommand(1);
  Flags flags;
  const std::pair<const char*, const char*> commands[] = {
      {"profile", "Isoperimetric profile and product bounds"},
      {"capacity", "Criterion constants and capacity ratio table"},
      {"beta", "Beta evaluation table, tensorised per n"},
      {"bound", "Tail-bound curves"},
      {"theta", "Theta table"},
      {"mc", "Monte Carlo tail estimates"},
      {"enlarge", "Product-set enlargement experiment"},
      {"check-h", "Hypothesis (H) report for a potential"},
      {"calibrate", "Fit free constants against a reference Monte Carlo matrix"}};
  for (const auto& [name, help] : commands) add_shared(app.add_subcommand(name, help), flags);
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }
  try {
    heavyconc::RunConfig cfg;
    cfg.command = heavyconc::parse_command(app.get_subcommands().front()->get_name());
    for (const auto& [key, value] : flags.values) heavyconc::set_config_key(cfg, key, value);
    cfg.jsonl = flags.jsonl;
    if (!flags.config_path.empty()) heavyconc::apply_config_file(cfg, flags.config_path);
    const heavyconc::RunResult r = heavyconc::run(cfg, std::cout, std::cerr);
    if (r.failures) std::cerr << r.failures << " row(s) with failure status\n";
    return r.exit_code;
  } catch (const heavyconc::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

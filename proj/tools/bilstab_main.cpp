#include <CLI11.hpp>

#include <cstdlib>
#include <iostream>
#include <string>
#include <vector>

#include "bilstab/scenarios.hpp"

namespace {

std::string default_out_root() {
  if (const char* env = std::getenv("BILSTAB_OUT_ROOT")) return env;
  return "runs";
}

std::map<std::string, std::string> parse_sets(const std::vector<std::string>& sets) {
  std::map<std::string, std::string> kv;
  for (const auto& s : sets) {
    const auto eq = s.find('=');
    if (eq == std::string::npos) {
      throw bilstab::ValidationError("--set expects key=value (got '" + s + "')");
    }
    kv[s.substr(0, eq)] = s.substr(eq + 1);
  }
  return kv;
}

std::vector<double> parse_values(const std::string& csv) {
  std::vector<double> vals;
  std::size_t start = 0;
  while (start <= csv.size()) {
    const auto comma = csv.find(',', start);
    const std::string tok = csv.substr(start, comma == std::string::npos ? csv.size() - start
                                                                         : comma - start);
    if (!tok.empty()) {
      try {
        vals.push_back(std::stod(tok));
      } catch (const std::exception&) {
        throw bilstab::ValidationError("--values: '" + tok + "' is not a number");
      }
    }
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return vals;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"bilstab - feedback stabilization workbench for bilinear systems"};
  app.require_subcommand(1);

  auto* list_cmd = app.add_subcommand("list", "print the scenario catalog");

  std::string scenario, out_dir, config_path, param, values_csv;
  std::vector<std::string> sets;
  std::uint64_t seed = 1;

  auto* run_cmd = app.add_subcommand("run", "run one scenario");
  run_cmd->add_option("--scenario", scenario, "catalog scenario name");
  run_cmd->add_option("--set", sets, "override, key=value (repeatable)");
  run_cmd->add_option("--out", out_dir, "output directory");
  run_cmd->add_option("--seed", seed, "random seed");
  run_cmd->add_option("--config", config_path, "flat key = value config file");

  auto* sweep_cmd = app.add_subcommand("sweep", "run one scenario over a parameter list");
  sweep_cmd->add_option("--scenario", scenario, "catalog scenario name")->required();
  sweep_cmd->add_option("--param", param, "parameter to sweep")->required();
  sweep_cmd->add_option("--values", values_csv, "comma-separated values")->required();
  sweep_cmd->add_option("--set", sets, "override, key=value (repeatable)");
  sweep_cmd->add_option("--out", out_dir, "output directory");
  sweep_cmd->add_option("--seed", seed, "random seed");

  auto* check_cmd = app.add_subcommand("check", "run the lemma oracles and assumption verifiers");
  check_cmd->add_option("--seed", seed, "random seed");

  CLI11_PARSE(app, argc, argv);

  try {
    if (list_cmd->parsed()) {
      for (const auto& name : bilstab::scenario_names()) std::cout << name << "\n";
      return 0;
    }
    if (run_cmd->parsed()) {
      bilstab::ScenarioConfig cfg;
      cfg.overrides = parse_sets(sets);
      cfg.seed = seed;
      if (!config_path.empty()) {
        auto kv = bilstab::parse_config_file(config_path);
        if (kv.count("scenario")) {
          cfg.scenario = kv["scenario"];
          kv.erase("scenario");
        }
        if (kv.count("seed")) {
          cfg.seed = static_cast<std::uint64_t>(std::stoull(kv["seed"]));
          kv.erase("seed");
        }
        for (const auto& [k, v] : kv) {
          if (!cfg.overrides.count(k)) cfg.overrides[k] = v;  // flags win over file
        }
      }
      if (!scenario.empty()) cfg.scenario = scenario;
      if (cfg.scenario.empty()) {
        throw bilstab::ValidationError("run: a scenario is required (--scenario or config file)");
      }
      cfg.out_dir = out_dir.empty()
                        ? (default_out_root() + "/" + cfg.scenario)
                        : out_dir;
      bilstab::run_scenario(cfg);
      return 0;
    }
    if (sweep_cmd->parsed()) {
      bilstab::ScenarioConfig cfg;
      cfg.scenario = scenario;
      cfg.overrides = parse_sets(sets);
      cfg.seed = seed;
      cfg.out_dir = out_dir.empty()
                        ? (default_out_root() + "/" + scenario + "_sweep_" + param)
                        : out_dir;
      bilstab::sweep(cfg, param, parse_values(values_csv));
      return 0;
    }
    if (check_cmd->parsed()) {
      const int failures = bilstab::run_check_suite(std::cout, seed);
      std::cout << (failures == 0 ? "all checks passed" : "FAILURES: " + std::to_string(failures))
                << "\n";
      return failures == 0 ? 0 : 1;
    }
  } catch (const bilstab::BlowupError& e) {
    std::cerr << "blow-up: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}

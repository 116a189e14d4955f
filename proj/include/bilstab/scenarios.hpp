#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "bilstab/analysis.hpp"
#include "bilstab/integrator.hpp"

namespace bilstab {

inline constexpr const char* kArtifactVersion = "0.1.0";

struct ScenarioConfig {
  std::string scenario;
  std::map<std::string, std::string> overrides;  ///< key = value settings
  std::string out_dir;
  std::uint64_t seed = 1;
};

/// A fully resolved scenario: model, law, initial state and options.
struct ScenarioSetup {
  std::string name;
  Model model;
  FeedbackLaw law;
  StateVector x0;
  SimOptions opts;
  std::map<std::string, double> params;  ///< resolved numeric parameters
  std::uint64_t seed = 1;
  RateFit::Kind fit_kind = RateFit::Kind::Exponential;
  bool wants_fit = false;
};

std::vector<std::string> scenario_names();
bool is_known_scenario(const std::string& name);

/// Resolves a catalog scenario against overrides. Unknown or inapplicable
/// keys raise ValidationError naming the key; unknown scenarios raise
/// ValidationError listing the catalog.
ScenarioSetup build_scenario(const std::string& name,
                             const std::map<std::string, std::string>& overrides,
                             std::uint64_t seed);

struct BoundCheck {
  std::string name;
  double measured = 0.0;
  double bound = 0.0;
  bool pass = false;
};

struct RunResult {
  ScenarioSetup setup;
  Trajectory trajectory;
  std::map<std::string, double> results;
  std::vector<BoundCheck> checks;
  std::string csv_path;
  std::string manifest_path;
  double wall_seconds = 0.0;
};

/// Simulates the scenario and runs its post-analysis without touching disk.
RunResult evaluate_scenario(const ScenarioSetup& setup);

/// evaluate_scenario + trajectory.csv + manifest.json in cfg.out_dir, plus a
/// one-line summary on stdout.
RunResult run_scenario(const ScenarioConfig& cfg);

struct SweepRow {
  double value = 0.0;
  std::string metric_name;
  double metric = 0.0;
  bool checks_pass = false;
};

struct SweepResult {
  std::string param;
  std::vector<SweepRow> rows;
  std::string summary_csv_path;
};

/// One run per value (rows in the given order); per-value outputs land in
/// cfg.out_dir/<param>_<value>/.
SweepResult sweep(const ScenarioConfig& cfg, const std::string& param,
                  const std::vector<double>& values);

/// Lemma oracles and assumption verifiers; prints one pass/fail row each and
/// returns the number of failures.
int run_check_suite(std::ostream& os, std::uint64_t seed);

/// Flat `key = value` config text ('#' comments). Returns all pairs,
/// including the reserved keys `scenario` and `seed`.
std::map<std::string, std::string> parse_config_file(const std::string& path);

/// Shortest round-trip decimal representation used in CSV output.
std::string format_g17(double v);

void write_trajectory_csv(const Trajectory& traj, const std::string& path);

}  // namespace bilstab

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "lmem/lmem_analysis.hpp"

namespace lmem {

struct ConfigError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct TimeGridConfig {
  double t_max = 10.0;  ///< in units of 1/mean(gamma); absolute when every gamma is zero
  int n_samples = 101;
};

struct GammaScanConfig {
  double gamma_min = 0.5;
  double gamma_max = 4.0;
  int n_points = 36;
};

/**
 * One experiment run. `model` accepts the full model JSON or the shorthand {n_sites, J, gamma}.
 * `options` holds experiment-specific knobs; unknown option keys are rejected.
 */
struct ExperimentConfig {
  std::string experiment;
  ModelParams model;
  TimeGridConfig time_grid;
  std::optional<GammaScanConfig> gamma_scan;
  std::optional<std::string> sector;
  std::string output_dir;  ///< empty: nothing is written
  std::uint64_t seed = 0;
  nlohmann::json options = nlohmann::json::object();

  static ExperimentConfig from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
};

ExperimentConfig load_config(const std::filesystem::path& path);

/// Experiment names accepted by run_experiment.
const std::vector<std::string>& experiment_names();

struct Check {
  std::string name;
  bool passed = false;
  double value = 0.0;
  double threshold = 0.0;
  std::string relation;  ///< "<", ">", "==" or "" for boolean checks
};

struct ExperimentReport {
  std::string experiment;
  std::vector<Check> checks;
  nlohmann::json summary = nlohmann::json::object();
  std::vector<std::string> files;
  PhysicalityTracker physicality;

  bool passed() const;
  const Check* find(const std::string& name) const;
  nlohmann::json to_json() const;
};

/// Absolute time grid for the config (t_max scaled by 1/mean gamma).
std::vector<double> experiment_times(const ExperimentConfig& cfg);

ExperimentReport run_fig3a(const ExperimentConfig& cfg);
ExperimentReport run_fig3b(const ExperimentConfig& cfg);
ExperimentReport run_fig4_purity(const ExperimentConfig& cfg);
ExperimentReport run_fig4_spectrum(const ExperimentConfig& cfg);
ExperimentReport run_sector_census(const ExperimentConfig& cfg);
ExperimentReport run_oracle_suite(const ExperimentConfig& cfg);

/// Dispatches on cfg.experiment and writes metadata.json when output_dir is set.
ExperimentReport run_experiment(const ExperimentConfig& cfg);

/// Counted seed stream: the k-th output of mt19937_64(seed).
std::vector<std::uint64_t> draw_seeds(std::uint64_t seed, std::size_t count);

}  // namespace lmem

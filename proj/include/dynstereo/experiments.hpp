#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "dynstereo/config.hpp"
#include "dynstereo/metrics.hpp"
#include "dynstereo/stereo.hpp"

namespace dynstereo {

inline constexpr int kReportSchemaVersion = 1;

struct InvariantCheck {
  std::string name;
  bool pass = true;
  std::string detail;
};

/// Metrics over one pixel subset; stereo and fused hold one entry per iteration count 0..n_iters.
struct SubsetMetrics {
  std::string subset;
  DepthMetrics mono;
  std::vector<DepthMetrics> stereo;
  std::vector<DepthMetrics> fused;
};

struct DepthScenarioResult {
  std::string name;
  std::vector<SubsetMetrics> subsets;  // "all", then "static" and "moving" when both are present
  std::vector<double> median_mu_error;  // per iteration, mu of the split containing GT
  std::vector<double> mean_weight;      // per iteration, over covered pixels
  bool median_monotone = false;
  bool rmse_improved = false;  // stereo RMSE after n_iters < at iteration 0
  bool fixed_point_expected = false;
  double max_mu_drift = 0.0;  // largest |mu_k - mu_0| over all pixels, splits and k
  std::vector<InvariantCheck> invariants;
  GaussianDepthField final_field;

  const SubsetMetrics* subset(const std::string& name) const;
};

DepthScenarioResult run_depth_scenario(const ExperimentConfig& cfg, const DepthScenario& scenario);

/// Report JSON plus sidecar files (name -> bytes) for one command.
struct CommandResult {
  nlohmann::ordered_json report;
  std::vector<std::pair<std::string, std::string>> files;
  bool invariants_passed = true;
};

CommandResult cmd_depth(const ExperimentConfig& cfg);
CommandResult cmd_nms(const ExperimentConfig& cfg);
CommandResult cmd_pool(const ExperimentConfig& cfg);
CommandResult cmd_gen_scene(const ExperimentConfig& cfg);

/// Writes `<name>.json` (report with `generated_at` appended last) and every sidecar into `dir`.
void write_command_outputs(const CommandResult& result, const std::string& name,
                           const std::filesystem::path& dir, const std::string& generated_at);

/// Current UTC time as ISO 8601.
std::string utc_timestamp();

}  // namespace dynstereo

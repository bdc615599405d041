#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "dynstereo/fusion.hpp"
#include "dynstereo/nms.hpp"
#include "dynstereo/scene.hpp"
#include "dynstereo/stereo.hpp"

namespace dynstereo {

inline constexpr int kConfigSchemaVersion = 1;

/// Parse or validation failure; what() is "<source>:<line>:<column>: <message>".
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& source, int line, int column, const std::string& message);
  int line() const { return line_; }
  int column() const { return column_; }

 private:
  int line_;
  int column_;
};

struct DepthScenario {
  std::string name;
  /// "builtin:canonical_static", "builtin:moving_object", or a scene file path.
  std::string scene = "builtin:canonical_static";
  Vec3 baseline = Vec3(0.5, 0.0, 0.0);  // source camera center in the reference camera frame
  double dt = 0.5;
};

struct NmsExperiment {
  NmsConfig nms;
  double iou_thre = 0.2;
  int suites = 100;
  int objects = 70;
  std::vector<double> w_grid{0.3, 0.35, 0.4, 0.45, 0.5, 0.55, 0.6, 0.65, 0.7, 0.75, 0.8};
  std::vector<double> radius_grid{0.25, 0.5, 0.75, 1.0, 1.25, 1.5, 1.75, 2.0, 2.5, 3.0, 4.0};
  std::string input;  // optional box CSV
};

struct PoolSize {
  std::size_t n = 0;
  int x = 0;
  int y = 0;
  int c = 0;
};

struct PoolExperiment {
  std::vector<PoolSize> sizes{{100000, 128, 128, 80}, {1000000, 128, 128, 80}};
  std::vector<int> workers{1, 8};
  int repeats = 5;
};

struct GenSceneExperiment {
  int n_surfaces = 6;
};

struct ExperimentConfig {
  int schema_version = kConfigSchemaVersion;
  std::uint64_t seed = 42;
  std::string out = "out";
  int workers = 1;
  CameraIntrinsics camera = default_intrinsics();
  std::vector<DepthScenario> scenarios{
      {"static", "builtin:canonical_static", Vec3(0.5, 0.0, 0.0), 0.5},
      {"moving", "builtin:moving_object", Vec3(0.5, 0.0, 0.0), 0.5},
      {"zero_baseline", "builtin:canonical_static", Vec3(0.0, 0.0, 0.0), 0.5}};
  StereoConfig stereo;
  MonoModel mono;
  double tau_w = 0.05;
  NmsExperiment nms;
  PoolExperiment pool;
  GenSceneExperiment gen_scene;
  std::filesystem::path base_dir;  // relative scene paths resolve against this

  void validate() const;
};

/// Reads an experiment config; absent keys keep their defaults, unknown keys are errors.
ExperimentConfig load_config(const std::filesystem::path& path);
ExperimentConfig parse_config(const std::string& text, const std::string& source = "<string>");

SceneSpec load_scene(const std::filesystem::path& path);
SceneSpec parse_scene(const std::string& text, const std::string& source = "<string>");
std::string scene_to_yaml(const SceneSpec& spec);

/// Resolves a scenario's scene reference (builtin name or path relative to base_dir).
SceneSpec resolve_scene(const std::string& ref, const std::filesystem::path& base_dir,
                        std::uint64_t builtin_seed = 42);

/// Fully resolved config, embedded in every report.
nlohmann::ordered_json config_to_json(const ExperimentConfig& cfg);

}  // namespace dynstereo

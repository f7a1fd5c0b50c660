#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

#include <Eigen/Core>

#include "laserplan/laser_model.hpp"
#include "laserplan/planner.hpp"
#include "laserplan/virtual_tissue.hpp"

namespace laserplan {

enum class Generator { SquareWell, SplineTumor };

struct SubsurfaceConfig {
  Eigen::Vector3d center{0.0, 0.0, -3.0};
  double radius = 1.5;
  std::optional<double> clearance;  // falls back to the planner's clearance
};

/// Everything needed to materialize a Scenario and its plant.
struct ScenarioConfig {
  std::string name = "square_well";
  Workspace workspace;
  Generator generator = Generator::SquareWell;
  Eigen::Vector2d well_size{6.0, 6.0};  // square_well, mm
  double depth = 2.0;                   // square_well, mm
  double mean_radius = 1.5;             // spline_tumor, mm
  double jitter = 0.2;                  // spline_tumor, fraction of the mean radius
  double max_depth = 2.0;               // spline_tumor, mm
  std::optional<SubsurfaceConfig> subsurface;
  MismatchConfig mismatch;
  double scan_noise = 0.02;  // mm
  std::uint64_t seed = 0;    // shapes the spline tumor

  Scenario materialize(double default_clearance) const;
};

enum class RunMode { Feedforward, Feedback };

struct RunConfig {
  std::filesystem::path scenario_path;  // empty when the scenario was given inline
  ScenarioConfig scenario;
  LaserParams laser;
  std::optional<std::filesystem::path> laser_fit_path;
  PlannerConfig planner;
  RunMode mode = RunMode::Feedback;
  std::filesystem::path output_dir = "run";
  std::uint64_t seed = 1;
};

/// Throws ConfigError on malformed JSON, unknown keys, wrong types or invalid values.
ScenarioConfig parse_scenario_config(std::string_view json_text);
std::string format_scenario_config(const ScenarioConfig& config);

/// Relative paths inside the config resolve against base_dir.
/// Throws ConfigError, including when a referenced file does not exist.
RunConfig parse_run_config(std::string_view json_text, const std::filesystem::path& base_dir);
RunConfig load_run_config(const std::filesystem::path& path);

/// Self-contained snapshot: the scenario and laser parameters are inlined.
std::string format_run_config(const RunConfig& config);

/// Fit-result file written by `laserplan fit`; the run config can point at it.
std::string format_fit_result(const LaserParams& params, const Eigen::Vector2d& mu, double rmse, double energy);
LaserParams parse_fit_result(std::string_view json_text);

std::string_view to_string(RunMode mode);

}  // namespace laserplan

#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "laserplan/config.hpp"
#include "laserplan/execution_log.hpp"

namespace laserplan {

inline constexpr const char* kOutputRootEnv = "LASERPLAN_OUTPUT_ROOT";
inline constexpr const char* kFormatVersion = "1";

/// Relative directories are placed under $LASERPLAN_OUTPUT_ROOT when it is set.
std::filesystem::path resolve_output_dir(const std::filesystem::path& dir);

/// Materializes the scenario, plans (and in feedforward mode executes the plan
/// on the plant), and writes into the output directory:
///   config.json  cuts.csv  log.jsonl  metrics.json
///   initial.hf  target.hf  constraint.hf  final.hf  [predicted.hf]
/// A stalled run still writes its artifacts, then throws Error(Stalled).
ExecutionLog run(const RunConfig& config);

/// Executes a precomputed plan on a plant, checking the constraint after every cut.
/// Throws ConstraintFault on the first violated node.
void execute_on_plant(VirtualTissue& plant, std::span<const CutInput> cuts, const ConstraintField& constraint,
                      const LaserParams& params, const EnergyTable& table);

/// Reads back log.jsonl plus the surfaces of a run directory.
ExecutionLog load_run(const std::filesystem::path& dir);

struct CompareRow {
  std::string mode;
  std::uint64_t seed = 0;
  double objective_volume = 0.0;
  std::optional<MetricReport> metrics;
  bool terminated = false;
  std::size_t cuts = 0;

  bool operator==(const CompareRow&) const = default;
};

inline constexpr const char* kMissingMarker = "NA";

/// One row per log: mode, seed, obj_vol, rmse, mae, pct_overcut, pct_undercut,
/// iou, terminated, cuts. Missing metrics are written as NA.
std::string report_compare(std::span<const ExecutionLog> logs);
std::vector<CompareRow> parse_compare(std::string_view csv);

enum class FigureKind { DepthMap, ResidualHist, Progress };

/// depth_map: removed depth (initial - final) on the grid, one CSV row per y.
/// residual_hist: bins of e = final - target.
/// progress: per-round step, residual volume, residual fraction and RMSE.
/// Throws MissingData when the log lacks what the kind needs.
std::string export_figure_data(const ExecutionLog& log, FigureKind kind, int bins = 50);
FigureKind parse_figure_kind(std::string_view name);

}  // namespace laserplan

#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "laserplan/calibration.hpp"
#include "laserplan/execution_log.hpp"
#include "laserplan/grid.hpp"
#include "laserplan/point_cloud.hpp"

namespace laserplan {

/// Shortest decimal text that parses back to the same double; "nan"/"inf" as such.
std::string format_double(double v);
/// Throws IoError on anything but a complete number.
double parse_double(std::string_view text);

std::string read_text(const std::filesystem::path& path);
/// Writes to a sibling temp file, then renames over the destination.
void write_text_atomic(const std::filesystem::path& path, std::string_view content);

/// Text form:
///   heightfield 1
///   origin <x> <y>
///   spacing <sx> <sy>
///   size <nx> <ny>
/// followed by ny rows of nx heights, "nan" for invalid nodes.
std::string format_heightfield(const HeightField& h);
HeightField parse_heightfield(std::string_view text);
void write_heightfield(const std::filesystem::path& path, const HeightField& h);
HeightField read_heightfield(const std::filesystem::path& path);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  /// Column index by name; throws IoError if absent.
  std::size_t column(std::string_view name) const;
  bool has_column(std::string_view name) const;
};

/// Comma separated, first line a header, no quoting. Throws IoError on ragged rows.
CsvTable parse_csv(std::string_view text);
std::string format_csv(const CsvTable& table);

/// Columns x, y, z and optionally label.
PointCloud3 parse_point_cloud_csv(std::string_view text);
std::string format_point_cloud_csv(const PointCloud3& cloud);

/// Columns a_r00..a_r22, a_tx, a_ty, a_tz, then the same with prefix b_.
std::vector<PosePair> parse_pose_pairs_csv(std::string_view text);
std::string format_pose_pairs_csv(std::span<const PosePair> pairs);

/// Columns cx, cy, z.
std::vector<CraterCenter> parse_crater_centers_csv(std::string_view text);

/// step, mu_x, mu_y, theta_x, theta_y, duty, predicted_cost.
std::string format_cuts_csv(std::span<const CutRecord> cuts);

/// One JSON object per line: a header record, then cut, round and final records.
/// Surfaces are not part of the log text.
std::string format_log_jsonl(const ExecutionLog& log);
ExecutionLog parse_log_jsonl(std::string_view text);

}  // namespace laserplan

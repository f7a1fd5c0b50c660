#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "laserplan/grid.hpp"
#include "laserplan/laser_model.hpp"
#include "laserplan/metrics.hpp"

namespace laserplan {

struct CutRecord {
  int step = 0;  // 1-based, strictly increasing
  CutInput cut;
  double predicted_cost = 0.0;        // mm, planner's cost after this cut
  std::uint64_t predicted_hash = 0;   // hash of the planner's predicted surface
  double wall_s = 0.0;                // seconds since the run started
};

/// One planning round: a tree in feedforward mode, a scan in feedback mode.
struct RoundRecord {
  int round = 0;
  int after_step = 0;  // cuts executed when the round closed
  std::optional<std::uint64_t> observed_hash;
  double residual_volume = 0.0;  // mm^3, on the surface the round ended with
  double residual_fraction = 0.0;
  std::optional<MetricReport> metrics;
};

struct ExecutionLog {
  std::string mode;  // "feedforward" or "feedback"
  std::uint64_t seed = 0;
  double objective_volume = 0.0;
  std::vector<CutRecord> cuts;
  std::vector<RoundRecord> rounds;
  bool terminated = false;
  bool stalled = false;
  std::optional<MetricReport> final_metrics;  // realized surface vs target

  HeightField initial;
  HeightField target;
  HeightField final_surface;  // realized (plant truth, or prediction without a plant)

  std::size_t observation_count() const;
};

}  // namespace laserplan

#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <utility>
#include <vector>

#include "laserplan/constraint.hpp"
#include "laserplan/error.hpp"
#include "laserplan/execution.hpp"
#include "laserplan/execution_log.hpp"
#include "laserplan/grid.hpp"
#include "laserplan/kernels.hpp"
#include "laserplan/laser_model.hpp"
#include "laserplan/virtual_tissue.hpp"

namespace laserplan {

/// Which signed error the asymmetry weight multiplies.
enum class WeightedSide {
  Overcut,   // material removed below the target; the default
  Undercut,  // the alternative binding, weighting material left behind
};

struct PlannerConfig {
  int k_F = 2000;  // expansions per tree
  double lambda = 2.0;
  WeightedSide lambda_side = WeightedSide::Overcut;
  int m = 9;  // cuts between scans in feedback mode
  double tilt_limit_deg = 10.0;
  std::pair<double, double> duty_range{20.0, 60.0};  // percent
  double clearance = 0.2;                            // mm
  double termination_fraction = 0.25;
  std::uint64_t seed = 1;
  double selection_temperature = 0.05;  // mm
  double residual_tolerance = 0.05;    // mm; thinner residue is not aimed at
  int stall_trees = 3;                 // consecutive empty trees before giving up
  int max_cuts = 1000;
  int batch = 16;  // candidates evaluated together in parallel mode
  TiltModel tilt_model = TiltModel::BeamAligned;
  ExecutionPolicy policy = ExecutionPolicy::Sequential;

  /// Throws InvalidArgument on out-of-range fields.
  void validate() const;
  kernels::ErrorWeights weights() const;
  CutOptions cut_options() const;
};

/// sqrt(mean((w e)^2)) with e = surface - target, w = lambda on the weighted
/// side and 1 on the other. Throws GridMismatch.
double node_cost(const HeightField& surface, const HeightField& target, double lambda,
                 WeightedSide side = WeightedSide::Overcut);

/// mu uniform over nodes where surface > target + residual_tolerance, theta
/// uniform in the tilt box, duty uniform over duty_range.
/// Throws NothingToCut if there is no such node.
CutInput sample_candidate(const HeightField& surface, const HeightField& target, const PlannerConfig& config,
                          std::mt19937_64& rng);

/// Tree node. Surfaces are not stored; they are replayed from the root.
struct PlanNode {
  int parent = -1;
  std::optional<CutInput> cut;
  double cost = 0.0;    // mm
  double sum_sq = 0.0;  // weighted squared error behind `cost`
  int depth = 0;
};

class PlanTree {
 public:
  PlanTree(HeightField root, const HeightField& target, const LaserParams& params, const EnergyTable& table,
           const PlannerConfig& config);

  const std::vector<PlanNode>& nodes() const { return nodes_; }
  const HeightField& root() const { return root_; }

  /// Materializes a node's predicted surface.
  HeightField surface(int node) const;
  void surface_into(int node, HeightField& out) const;
  std::vector<CutInput> path_to(int node) const;
  /// Lowest-cost node; the earliest wins ties so the root is preferred.
  int best() const;

  /// A crater's height change over its stamp box, row-major within the box.
  struct Carve {
    kernels::IndexBox box;
    std::vector<double> delta;
  };

  struct Expansion {
    enum Kind { Child, Rejected, Idle } kind = Idle;  // Idle: nothing to aim at, or the cut removes nothing
    PlanNode node;
    Carve carve;
  };

  /// Samples and evaluates one child of `parent` without inserting it.
  /// `scratch` is overwritten.
  Expansion expand(int parent, const ConstraintField& constraint, std::mt19937_64& rng, HeightField& scratch) const;
  int insert(Expansion child);

 private:
  HeightField root_;
  const HeightField* target_;
  LaserParams params_;
  const EnergyTable* table_;
  PlannerConfig config_;
  kernels::ErrorWeights weights_;
  std::size_t count_ = 0;  // nodes entering the cost
  std::vector<PlanNode> nodes_;
  std::vector<Carve> carves_;           // per node, empty at the root
  std::vector<std::size_t> residual_;  // root nodes worth aiming at; a superset for every descendant

  std::vector<int> chain(int node) const;  // root-first, excluding the root
  double height(const std::vector<int>& chain, int i, int j) const;
};

struct TreeResult {
  std::vector<CutInput> best_path;
  std::vector<double> path_costs;  // cost after each cut of best_path
  HeightField best_surface;
  double best_cost = 0.0;
  double root_cost = 0.0;
  std::size_t node_count = 0;
  int rejected = 0;  // candidates refused by the constraint
};

/// Grows one tree for k_F expansions from `root` and returns the path to its
/// cheapest node. Throws NoProgress if no child could be inserted.
TreeResult grow_tree(const HeightField& root, const HeightField& target, const ConstraintField& constraint,
                     const LaserParams& params, const EnergyTable& table, const PlannerConfig& config,
                     std::mt19937_64& rng);
TreeResult grow_tree(const HeightField& root, const HeightField& target, const ConstraintField& constraint,
                     const LaserParams& params, const EnergyTable& table, const PlannerConfig& config);

struct FeedforwardPlan {
  std::vector<CutInput> cuts;
  std::vector<double> predicted_costs;  // per cut
  HeightField predicted;                // surface after all cuts
  std::vector<RoundRecord> rounds;      // one per tree
  double objective_volume = 0.0;
  bool terminated = false;
};

/// Thrown when planning gives up; carries whatever was planned so far.
class PlanStalled : public Error {
 public:
  PlanStalled(const std::string& what, FeedforwardPlan partial)
      : Error(ErrorCode::Stalled, what), partial_(std::move(partial)) {}
  const FeedforwardPlan& partial() const { return partial_; }

 private:
  FeedforwardPlan partial_;
};

/// Residual volume at or below termination_fraction of the objective.
bool terminated(double residual, double objective, double fraction);

/// Chains trees, each rooted at the previous best surface, until the
/// termination criterion holds. Throws PlanStalled.
FeedforwardPlan plan_feedforward(const HeightField& initial, const HeightField& target,
                                 const ConstraintField& constraint, const LaserParams& params,
                                 const EnergyTable& table, const PlannerConfig& config);

/// Thrown when the feedback loop gives up; carries the log so far.
class FeedbackStalled : public Error {
 public:
  FeedbackStalled(const std::string& what, ExecutionLog log)
      : Error(ErrorCode::Stalled, what), log_(std::move(log)) {}
  const ExecutionLog& log() const { return log_; }

 private:
  ExecutionLog log_;
};

/// Closed loop against the plant: plan from the latest scan, execute, and
/// rescan every m cuts. Throws FeedbackStalled, PlantFault, or
/// ConstraintFault if the plant ever dips below the ceiling.
ExecutionLog plan_with_feedback(VirtualTissue& plant, const HeightField& target, const ConstraintField& constraint,
                                const LaserParams& params, const EnergyTable& table, const PlannerConfig& config);

}  // namespace laserplan

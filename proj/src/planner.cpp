#include "laserplan/planner.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "kernels_detail.hpp"
#include "laserplan/metrics.hpp"
#include "laserplan/rng.hpp"

namespace laserplan {

void PlannerConfig::validate() const {
  const auto fail = [](const char* what) { throw Error(ErrorCode::InvalidArgument, what); };
  if (k_F < 1) fail("k_F must be >= 1");
  if (!(lambda >= 1.0) || !std::isfinite(lambda)) fail("lambda must be >= 1");
  if (m < 1) fail("m must be >= 1");
  if (!(tilt_limit_deg >= 0.0) || !(tilt_limit_deg < 90.0)) fail("tilt limit must lie in [0, 90)");
  if (!(duty_range.first <= duty_range.second)) fail("duty range is empty");
  if (!(clearance >= 0.0)) fail("clearance must be >= 0");
  if (!(termination_fraction >= 0.0) || !std::isfinite(termination_fraction)) fail("termination fraction must be >= 0");
  if (!(selection_temperature > 0.0)) fail("selection temperature must be > 0");
  if (!(residual_tolerance >= 0.0)) fail("residual tolerance must be >= 0");
  if (stall_trees < 1) fail("stall_trees must be >= 1");
  if (max_cuts < 0) fail("max_cuts must be >= 0");
  if (batch < 1) fail("batch must be >= 1");
}

kernels::ErrorWeights PlannerConfig::weights() const {
  return lambda_side == WeightedSide::Overcut ? kernels::ErrorWeights{1.0, lambda} : kernels::ErrorWeights{lambda, 1.0};
}

CutOptions PlannerConfig::cut_options() const { return {tilt_model, tilt_limit_deg, policy}; }

namespace {

kernels::ErrorWeights weights_for(double lambda, WeightedSide side) {
  PlannerConfig c;
  c.lambda = lambda;
  c.lambda_side = side;
  return c.weights();
}

double cost_of(double sum_sq, std::size_t count) { return count == 0 ? 0.0 : std::sqrt(sum_sq / count); }

// Tilt and duty draws for an already chosen incident point.
CutInput aim(const Eigen::Vector2d& mu, const PlannerConfig& config, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> tilt(-config.tilt_limit_deg, config.tilt_limit_deg);
  std::uniform_real_distribution<double> duty(config.duty_range.first, config.duty_range.second);
  CutInput cut;
  cut.mu = mu;
  cut.theta_deg.x() = tilt(rng);
  cut.theta_deg.y() = tilt(rng);
  cut.duty = duty(rng);
  return cut;
}

}  // namespace

double node_cost(const HeightField& surface, const HeightField& target, double lambda, WeightedSide side) {
  surface.require_same_grid(target, "node_cost target");
  const auto sums =
      kernels::serial::weighted_error(surface, target, weights_for(lambda, side), kernels::IndexBox::whole(surface.grid()));
  return cost_of(sums.sum_sq, sums.count);
}

CutInput sample_candidate(const HeightField& surface, const HeightField& target, const PlannerConfig& config,
                          std::mt19937_64& rng) {
  surface.require_same_grid(target, "candidate target");
  std::vector<std::size_t> residual;
  for (std::size_t k = 0; k < surface.size(); ++k) {
    if (surface.valid_at(k) && target.valid_at(k) && surface.at(k) > target.at(k) + config.residual_tolerance) {
      residual.push_back(k);
    }
  }
  if (residual.empty()) throw Error(ErrorCode::NothingToCut, "no residual material above the target");
  std::uniform_int_distribution<std::size_t> pick(0, residual.size() - 1);
  const GridSpec& g = surface.grid();
  const std::size_t k = residual[pick(rng)];
  return aim(g.node(static_cast<int>(k % g.nx), static_cast<int>(k / g.nx)), config, rng);
}

PlanTree::PlanTree(HeightField root, const HeightField& target, const LaserParams& params, const EnergyTable& table,
                   const PlannerConfig& config)
    : root_(std::move(root)), target_(&target), params_(params), table_(&table), config_(config) {
  root_.require_same_grid(target, "tree target");
  config_.validate();
  params_.validate();
  weights_ = config_.weights();
  const auto sums = kernels::serial::weighted_error(root_, target, weights_, kernels::IndexBox::whole(root_.grid()));
  count_ = sums.count;
  if (count_ == 0) throw Error(ErrorCode::MissingData, "root and target share no valid node");
  nodes_.push_back({-1, std::nullopt, cost_of(sums.sum_sq, count_), sums.sum_sq, 0});
  carves_.emplace_back();
  for (std::size_t k = 0; k < root_.size(); ++k) {
    if (root_.valid_at(k) && target.valid_at(k) && root_.at(k) > target.at(k) + config_.residual_tolerance) {
      residual_.push_back(k);
    }
  }
}

std::vector<int> PlanTree::chain(int node) const {
  std::vector<int> out;
  for (int n = node; n > 0; n = nodes_[n].parent) out.push_back(n);
  std::reverse(out.begin(), out.end());
  return out;
}

double PlanTree::height(const std::vector<int>& chain, int i, int j) const {
  double z = root_(i, j);
  for (int n : chain) {
    const Carve& c = carves_[n];
    if (i < c.box.i0 || i > c.box.i1 || j < c.box.j0 || j > c.box.j1) continue;
    z += c.delta[static_cast<std::size_t>(j - c.box.j0) * (c.box.i1 - c.box.i0 + 1) + (i - c.box.i0)];
  }
  return z;
}

void PlanTree::surface_into(int node, HeightField& out) const {
  out = root_;
  const GridSpec& g = out.grid();
  for (int n : chain(node)) {
    const Carve& c = carves_[n];
    std::size_t q = 0;
    for (int j = c.box.j0; j <= c.box.j1; ++j) {
      for (int i = c.box.i0; i <= c.box.i1; ++i, ++q) {
        const std::size_t k = g.index(i, j);
        if (out.valid_at(k)) out.at(k) += c.delta[q];
      }
    }
  }
}

HeightField PlanTree::surface(int node) const {
  HeightField out;
  surface_into(node, out);
  return out;
}

std::vector<CutInput> PlanTree::path_to(int node) const {
  std::vector<CutInput> path;
  for (int n : chain(node)) path.push_back(*nodes_[n].cut);
  return path;
}

int PlanTree::best() const {
  int best = 0;
  for (int n = 1; n < static_cast<int>(nodes_.size()); ++n) {
    if (nodes_[n].cost < nodes_[best].cost) best = n;
  }
  return best;
}

PlanTree::Expansion PlanTree::expand(int parent, const ConstraintField& constraint, std::mt19937_64& rng,
                                     HeightField& scratch) const {
  constexpr int kDraws = 64;
  Expansion out;
  if (residual_.empty()) return out;
  const GridSpec& g = root_.grid();
  const auto path = chain(parent);

  // The parent's residual set is a subset of the root's, so rejection
  // sampling from the root list is uniform over the parent's.
  std::optional<CutInput> cut;
  std::uniform_int_distribution<std::size_t> pick(0, residual_.size() - 1);
  for (int d = 0; d < kDraws && !cut; ++d) {
    const std::size_t k = residual_[pick(rng)];
    const int i = static_cast<int>(k % g.nx), j = static_cast<int>(k / g.nx);
    if (height(path, i, j) > target_->at(k) + config_.residual_tolerance) cut = aim(g.node(i, j), config_, rng);
  }
  if (!cut) {
    surface_into(parent, scratch);
    try {
      cut = sample_candidate(scratch, *target_, config_, rng);
    } catch (const Error& e) {
      if (e.code() == ErrorCode::NothingToCut) return out;
      throw;
    }
  }
  const auto stamp = make_stamp(g, *cut, params_, energy_for_duty(*table_, cut->duty), config_.tilt_model);
  if (stamp.box.empty()) return out;

  const kernels::IndexBox& box = stamp.box;
  const int bw = box.i1 - box.i0 + 1;
  std::vector<double> before(box.count());
  for (int j = box.j0; j <= box.j1; ++j) {
    for (int i = box.i0; i <= box.i1; ++i) before[static_cast<std::size_t>(j - box.j0) * bw + (i - box.i0)] = root_(i, j);
  }
  for (int n : path) {
    const Carve& c = carves_[n];
    const int lo_i = std::max(c.box.i0, box.i0), hi_i = std::min(c.box.i1, box.i1);
    const int lo_j = std::max(c.box.j0, box.j0), hi_j = std::min(c.box.j1, box.j1);
    const int cw = c.box.i1 - c.box.i0 + 1;
    for (int j = lo_j; j <= hi_j; ++j) {
      for (int i = lo_i; i <= hi_i; ++i) {
        before[static_cast<std::size_t>(j - box.j0) * bw + (i - box.i0)] +=
            c.delta[static_cast<std::size_t>(j - c.box.j0) * cw + (i - c.box.i0)];
      }
    }
  }

  // Only nodes the crater actually lowers can change the cost or the constraint.
  out.carve.box = box;
  out.carve.delta.assign(box.count(), 0.0);
  double delta_sq = 0.0;
  bool changed = false;
  std::size_t q = 0;
  for (int j = box.j0; j <= box.j1; ++j) {
    const double y = g.y(j);
    for (int i = box.i0; i <= box.i1; ++i, ++q) {
      const std::size_t k = g.index(i, j);
      if (!root_.valid_at(k)) continue;
      const double d = kernels::detail::crater_delta(stamp, g.x(i), y);
      if (d == 0.0) continue;
      out.carve.delta[q] = d;
      const double after = before[q] + d;
      if (constraint.ceiling.valid_at(k) && after < constraint.ceiling.at(k)) {
        out.kind = Expansion::Rejected;
        return out;
      }
      changed = true;
      if (target_->valid_at(k)) {
        delta_sq += kernels::detail::weighted_term(after - target_->at(k), weights_) -
                    kernels::detail::weighted_term(before[q] - target_->at(k), weights_);
      }
    }
  }
  if (!changed) return out;
  const PlanNode& p = nodes_[parent];
  out.kind = Expansion::Child;
  out.node.parent = parent;
  out.node.cut = *cut;
  out.node.sum_sq = std::max(0.0, p.sum_sq + delta_sq);
  out.node.cost = cost_of(out.node.sum_sq, count_);
  out.node.depth = p.depth + 1;
  return out;
}

int PlanTree::insert(Expansion child) {
  nodes_.push_back(std::move(child.node));
  carves_.push_back(std::move(child.carve));
  return static_cast<int>(nodes_.size()) - 1;
}

TreeResult grow_tree(const HeightField& root, const HeightField& target, const ConstraintField& constraint,
                     const LaserParams& params, const EnergyTable& table, const PlannerConfig& config,
                     std::mt19937_64& rng) {
  root.require_same_grid(constraint.ceiling, "tree constraint");
  PlanTree tree(root, target, params, table, config);
  TreeResult result;
  result.root_cost = tree.nodes()[0].cost;

  bool any_residual = false;
  for (std::size_t k = 0; k < root.size() && !any_residual; ++k) {
    any_residual = root.valid_at(k) && target.valid_at(k) && root.at(k) > target.at(k) + config.residual_tolerance;
  }
  if (any_residual) {
    // Boltzmann selection relative to the root cost; prefix sums allow
    // O(log n) draws as the tree grows.
    const double ref = result.root_cost;
    std::vector<double> prefix{1.0};
    const auto add_weight = [&](double cost) {
      prefix.push_back(prefix.back() + std::exp((ref - cost) / config.selection_temperature));
    };
    const auto select = [&]() {
      std::uniform_real_distribution<double> u(0.0, prefix.back());
      const auto it = std::upper_bound(prefix.begin(), prefix.end(), u(rng));
      return static_cast<int>(std::min<std::ptrdiff_t>(it - prefix.begin(), std::ssize(prefix) - 1));
    };

    int inserted = 0;
    if (config.policy == ExecutionPolicy::Sequential) {
      HeightField scratch;
      for (int it = 0; it < config.k_F; ++it) {
        const auto child = tree.expand(select(), constraint, rng, scratch);
        if (child.kind == PlanTree::Expansion::Rejected) ++result.rejected;
        if (child.kind != PlanTree::Expansion::Child) continue;
        const double cost = child.node.cost;
        tree.insert(std::move(child));
        add_weight(cost);
        ++inserted;
      }
    } else {
      std::vector<PlanTree::Expansion> slots(static_cast<std::size_t>(config.batch));
      std::vector<int> parents(slots.size());
      std::vector<std::uint64_t> seeds(slots.size());
      for (int done = 0; done < config.k_F; done += config.batch) {
        const int n = std::min(config.batch, config.k_F - done);
        for (int s = 0; s < n; ++s) {
          parents[s] = select();
          seeds[s] = rng();
        }
#pragma omp parallel
        {
          HeightField scratch;
#pragma omp for schedule(dynamic)
          for (int s = 0; s < n; ++s) {
            std::mt19937_64 worker(seeds[s]);
            slots[s] = tree.expand(parents[s], constraint, worker, scratch);
          }
        }
        for (int s = 0; s < n; ++s) {
          if (slots[s].kind == PlanTree::Expansion::Rejected) ++result.rejected;
          if (slots[s].kind != PlanTree::Expansion::Child) continue;
          const double cost = slots[s].node.cost;
          tree.insert(std::move(slots[s]));
          add_weight(cost);
          ++inserted;
        }
      }
    }
    if (inserted == 0) throw Error(ErrorCode::NoProgress, "no feasible child after k_F expansions");
  }

  const int best = tree.best();
  result.best_path = tree.path_to(best);
  for (int n = best; n > 0; n = tree.nodes()[n].parent) result.path_costs.push_back(tree.nodes()[n].cost);
  std::reverse(result.path_costs.begin(), result.path_costs.end());
  result.best_surface = tree.surface(best);
  result.best_cost = node_cost(result.best_surface, target, config.lambda, config.lambda_side);
  if (!result.path_costs.empty()) result.path_costs.back() = result.best_cost;
  result.node_count = tree.nodes().size();
  return result;
}

TreeResult grow_tree(const HeightField& root, const HeightField& target, const ConstraintField& constraint,
                     const LaserParams& params, const EnergyTable& table, const PlannerConfig& config) {
  auto rng = substream(config.seed, Stream::Planner);
  return grow_tree(root, target, constraint, params, table, config, rng);
}

bool terminated(double residual, double objective, double fraction) { return residual <= fraction * objective; }

namespace {

void require_target_below(const HeightField& initial, const HeightField& target) {
  initial.require_same_grid(target, "plan target");
  for (std::size_t k = 0; k < initial.size(); ++k) {
    if (initial.valid_at(k) && target.valid_at(k) && target.at(k) > initial.at(k) + 1e-12) {
      throw Error(ErrorCode::InvalidTarget, "target lies above the initial surface");
    }
  }
}

RoundRecord round_record(int round, int after_step, const HeightField& surface, const HeightField& target,
                         const HeightField& initial, double objective, ExecutionPolicy policy) {
  RoundRecord r;
  r.round = round;
  r.after_step = after_step;
  r.residual_volume = residual_volume(surface, target, policy);
  r.residual_fraction = objective > 0.0 ? r.residual_volume / objective : 0.0;
  try {
    r.metrics = compute_metrics(surface, target, initial);
  } catch (const Error&) {
    r.metrics.reset();
  }
  return r;
}

}  // namespace

FeedforwardPlan plan_feedforward(const HeightField& initial, const HeightField& target,
                                 const ConstraintField& constraint, const LaserParams& params,
                                 const EnergyTable& table, const PlannerConfig& config) {
  config.validate();
  require_target_below(initial, target);
  FeedforwardPlan plan;
  plan.objective_volume = objective_volume(initial, target);
  plan.predicted = initial;
  auto rng = substream(config.seed, Stream::Planner);
  int empties = 0;
  int round = 0;
  while (true) {
    const double residual = residual_volume(plan.predicted, target, config.policy);
    if (terminated(residual, plan.objective_volume, config.termination_fraction)) {
      plan.terminated = true;
      return plan;
    }
    if (std::ssize(plan.cuts) >= config.max_cuts) throw PlanStalled("cut budget exhausted", std::move(plan));
    TreeResult tree;
    try {
      tree = grow_tree(plan.predicted, target, constraint, params, table, config, rng);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::NoProgress) throw;
    }
    if (tree.best_path.empty()) {
      if (++empties >= config.stall_trees) throw PlanStalled("consecutive trees found no improvement", std::move(plan));
      continue;
    }
    empties = 0;
    const std::size_t room = static_cast<std::size_t>(config.max_cuts) - plan.cuts.size();
    if (tree.best_path.size() > room) {
      // Truncated path: replay only the prefix that fits the budget.
      tree.best_path.resize(room);
      tree.path_costs.resize(room);
      for (const auto& cut : tree.best_path) {
        plan.predicted = apply_cut(plan.predicted, cut, params, table, config.cut_options());
      }
    } else {
      plan.predicted = std::move(tree.best_surface);
    }
    plan.cuts.insert(plan.cuts.end(), tree.best_path.begin(), tree.best_path.end());
    plan.predicted_costs.insert(plan.predicted_costs.end(), tree.path_costs.begin(), tree.path_costs.end());
    plan.rounds.push_back(round_record(++round, static_cast<int>(plan.cuts.size()), plan.predicted, target, initial,
                                       plan.objective_volume, config.policy));
  }
}

ExecutionLog plan_with_feedback(VirtualTissue& plant, const HeightField& target, const ConstraintField& constraint,
                                const LaserParams& params, const EnergyTable& table, const PlannerConfig& config) {
  config.validate();
  const HeightField initial = plant.initial();
  require_target_below(initial, target);
  initial.require_same_grid(constraint.ceiling, "feedback constraint");
  const auto start = std::chrono::steady_clock::now();
  const CutOptions options = config.cut_options();

  ExecutionLog log;
  log.mode = "feedback";
  log.seed = config.seed;
  log.objective_volume = objective_volume(initial, target);
  log.initial = initial;
  log.target = target;

  auto rng = substream(config.seed, Stream::Planner);
  auto scan_rng = substream(config.seed, Stream::Scan);

  // `belief` is what the planner roots on. `chain` replays every executed cut
  // through the model from the initial surface; since the plant only ever
  // cuts shallower than the model, it bounds the truth from below.
  HeightField belief = initial;
  HeightField chain = initial;
  ConstraintField planning = constraint;
  int batch = 0;
  int empties = 0;
  int step = 0;

  const auto finish = [&]() {
    log.final_surface = plant.truth();
    log.final_metrics = compute_metrics(plant.truth(), target, initial);
  };
  const auto observe = [&]() {
    belief = scan_surface(plant, scan_rng, config.policy);
    // Noise can make the scan read higher than the truth; lift the ceiling
    // by however far the scan sits above the lower bound.
    planning = constraint;
    for (std::size_t k = 0; k < belief.size(); ++k) {
      if (!planning.active(k)) continue;
      planning.ceiling.at(k) += std::max(0.0, belief.at(k) - chain.at(k));
    }
    RoundRecord r = round_record(static_cast<int>(log.rounds.size()) + 1, step, belief, target, initial,
                                 log.objective_volume, config.policy);
    r.observed_hash = belief.hash();
    log.rounds.push_back(r);
    batch = 0;
    return terminated(r.residual_volume, log.objective_volume, config.termination_fraction);
  };
  const auto stall = [&](const char* why) {
    if (batch > 0 && observe()) {
      log.terminated = true;
      finish();
      return;
    }
    log.stalled = true;
    finish();
    throw FeedbackStalled(why, std::move(log));
  };

  if (terminated(residual_volume(belief, target, config.policy), log.objective_volume, config.termination_fraction)) {
    log.terminated = true;
    finish();
    return log;
  }
  while (true) {
    if (step >= config.max_cuts) {
      stall("cut budget exhausted");
      return log;
    }
    TreeResult tree;
    try {
      tree = grow_tree(belief, target, planning, params, table, config, rng);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::NoProgress) throw;
    }
    if (tree.best_path.empty()) {
      if (++empties >= config.stall_trees) {
        stall("consecutive trees found no improvement");
        return log;
      }
      continue;
    }
    empties = 0;
    const auto take = std::min<std::size_t>({tree.best_path.size(), static_cast<std::size_t>(config.m - batch),
                                             static_cast<std::size_t>(config.max_cuts - step)});
    for (std::size_t c = 0; c < take; ++c) {
      const CutInput& cut = tree.best_path[c];
      plant.apply(cut, params, table);
      const auto check = check_constraint(plant.truth(), constraint);
      if (!check.ok()) {
        throw Error(ErrorCode::ConstraintFault,
                    "plant surface fell below the ceiling at " + std::to_string(check.violated.size()) + " nodes");
      }
      belief = apply_cut(belief, cut, params, table, options);
      chain = apply_cut(chain, cut, params, table, options);
      CutRecord rec;
      rec.step = ++step;
      rec.cut = cut;
      rec.predicted_cost = node_cost(belief, target, config.lambda, config.lambda_side);
      rec.predicted_hash = belief.hash();
      rec.wall_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      log.cuts.push_back(rec);
      ++batch;
    }
    if (batch == config.m && observe()) {
      log.terminated = true;
      finish();
      return log;
    }
  }
}

}  // namespace laserplan

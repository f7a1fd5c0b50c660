#include "laserplan/run.hpp"

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <exception>

#include <json.hpp>

#include "laserplan/error.hpp"
#include "laserplan/io.hpp"
#include "laserplan/metrics.hpp"

namespace laserplan {

namespace fs = std::filesystem;
using nlohmann::json;

fs::path resolve_output_dir(const fs::path& dir) {
  const char* root = std::getenv(kOutputRootEnv);
  if (root && *root && dir.is_relative()) return fs::path(root) / dir;
  return dir;
}

void execute_on_plant(VirtualTissue& plant, std::span<const CutInput> cuts, const ConstraintField& constraint,
                      const LaserParams& params, const EnergyTable& table) {
  for (std::size_t k = 0; k < cuts.size(); ++k) {
    plant.apply(cuts[k], params, table);
    const ConstraintCheck check = check_constraint(plant.truth(), constraint);
    if (!check.ok()) {
      throw Error(ErrorCode::ConstraintFault, "cut " + std::to_string(k + 1) + " crossed the ceiling at " +
                                                  std::to_string(check.violated.size()) + " nodes");
    }
  }
}

namespace {

ExecutionLog feedforward_log(const FeedforwardPlan& plan, const Scenario& scenario, const RunConfig& config,
                             const EnergyTable& table, bool stalled, double plan_seconds) {
  ExecutionLog log;
  log.mode = "feedforward";
  log.seed = config.seed;
  log.objective_volume = plan.objective_volume;
  log.initial = scenario.initial;
  log.target = scenario.target;
  log.rounds = plan.rounds;
  log.terminated = plan.terminated;
  log.stalled = stalled;
  HeightField predicted = scenario.initial;
  const CutOptions options = config.planner.cut_options();
  for (std::size_t k = 0; k < plan.cuts.size(); ++k) {
    predicted = apply_cut(predicted, plan.cuts[k], config.laser, table, options);
    CutRecord rec;
    rec.step = static_cast<int>(k) + 1;
    rec.cut = plan.cuts[k];
    rec.predicted_cost = plan.predicted_costs[k];
    rec.predicted_hash = predicted.hash();
    rec.wall_s = plan_seconds;
    log.cuts.push_back(rec);
  }
  VirtualTissue plant(scenario.initial, config.scenario.mismatch, config.scenario.scan_noise, scenario.embedded,
                      options);
  execute_on_plant(plant, plan.cuts, scenario.constraint, config.laser, table);
  log.final_surface = plant.truth();
  log.final_metrics = compute_metrics(plant.truth(), scenario.target, scenario.initial);
  return log;
}

json metrics_json(const std::optional<MetricReport>& m) {
  if (!m) return nullptr;
  return {{"rmse", m->rmse}, {"mae", m->mae}, {"pct_overcut", m->pct_overcut}, {"pct_undercut", m->pct_undercut},
          {"iou", m->iou}};
}

void write_artifacts(const fs::path& dir, const RunConfig& config, const Scenario& scenario, const ExecutionLog& log,
                     const HeightField* predicted) {
  write_text_atomic(dir / "config.json", format_run_config(config));
  write_text_atomic(dir / "cuts.csv", format_cuts_csv(log.cuts));
  write_text_atomic(dir / "log.jsonl", format_log_jsonl(log));
  json m{{"format_version", kFormatVersion},
         {"mode", log.mode},
         {"seed", log.seed},
         {"objective_volume", log.objective_volume},
         {"cuts", log.cuts.size()},
         {"observations", log.observation_count()},
         {"terminated", log.terminated},
         {"stalled", log.stalled},
         {"final", metrics_json(log.final_metrics)}};
  write_text_atomic(dir / "metrics.json", m.dump(2) + "\n");
  write_heightfield(dir / "initial.hf", scenario.initial);
  write_heightfield(dir / "target.hf", scenario.target);
  write_heightfield(dir / "constraint.hf", scenario.constraint.ceiling);
  write_heightfield(dir / "final.hf", log.final_surface);
  if (predicted) write_heightfield(dir / "predicted.hf", *predicted);
}

}  // namespace

ExecutionLog run(const RunConfig& config) {
  config.planner.validate();
  const fs::path dir = resolve_output_dir(config.output_dir);
  PlannerConfig planner = config.planner;
  planner.seed = config.seed;
  RunConfig effective = config;
  effective.planner = planner;

  const Scenario scenario = config.scenario.materialize(planner.clearance);
  const EnergyTable table;

  if (config.mode == RunMode::Feedforward) {
    const auto start = std::chrono::steady_clock::now();
    FeedforwardPlan plan;
    std::exception_ptr stall;
    try {
      plan = plan_feedforward(scenario.initial, scenario.target, scenario.constraint, config.laser, table, planner);
    } catch (const PlanStalled& e) {
      plan = e.partial();
      stall = std::current_exception();
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const ExecutionLog log = feedforward_log(plan, scenario, effective, table, stall != nullptr, seconds);
    write_artifacts(dir, effective, scenario, log, &plan.predicted);
    if (stall) std::rethrow_exception(stall);
    return log;
  }

  VirtualTissue plant(scenario.initial, config.scenario.mismatch, config.scenario.scan_noise, scenario.embedded,
                      planner.cut_options());
  try {
    ExecutionLog log = plan_with_feedback(plant, scenario.target, scenario.constraint, config.laser, table, planner);
    write_artifacts(dir, effective, scenario, log, nullptr);
    return log;
  } catch (const FeedbackStalled& e) {
    write_artifacts(dir, effective, scenario, e.log(), nullptr);
    throw;
  }
}

ExecutionLog load_run(const fs::path& dir) {
  ExecutionLog log = parse_log_jsonl(read_text(dir / "log.jsonl"));
  for (auto [name, field] : {std::pair{"initial.hf", &log.initial}, std::pair{"target.hf", &log.target},
                             std::pair{"final.hf", &log.final_surface}}) {
    if (fs::exists(dir / name)) *field = read_heightfield(dir / name);
  }
  return log;
}

std::string report_compare(std::span<const ExecutionLog> logs) {
  if (logs.empty()) throw Error(ErrorCode::MissingData, "report needs at least one log");
  CsvTable t;
  t.header = {"mode", "seed", "obj_vol", "rmse", "mae", "pct_overcut", "pct_undercut", "iou", "terminated", "cuts"};
  for (const auto& log : logs) {
    std::vector<std::string> row{log.mode, std::to_string(log.seed), format_double(log.objective_volume)};
    if (log.final_metrics) {
      const MetricReport& m = *log.final_metrics;
      for (double v : {m.rmse, m.mae, m.pct_overcut, m.pct_undercut, m.iou}) row.push_back(format_double(v));
    } else {
      row.insert(row.end(), 5, kMissingMarker);
    }
    row.push_back(log.terminated ? "1" : "0");
    row.push_back(std::to_string(log.cuts.size()));
    t.rows.push_back(std::move(row));
  }
  return format_csv(t);
}

std::vector<CompareRow> parse_compare(std::string_view csv) {
  const CsvTable t = parse_csv(csv);
  std::vector<CompareRow> out;
  for (const auto& r : t.rows) {
    CompareRow row;
    row.mode = r[t.column("mode")];
    row.seed = std::stoull(r[t.column("seed")]);
    row.objective_volume = parse_double(r[t.column("obj_vol")]);
    if (r[t.column("rmse")] != kMissingMarker) {
      MetricReport m;
      m.rmse = parse_double(r[t.column("rmse")]);
      m.mae = parse_double(r[t.column("mae")]);
      m.pct_overcut = parse_double(r[t.column("pct_overcut")]);
      m.pct_undercut = parse_double(r[t.column("pct_undercut")]);
      m.iou = parse_double(r[t.column("iou")]);
      row.metrics = m;
    }
    row.terminated = r[t.column("terminated")] == "1";
    row.cuts = std::stoull(r[t.column("cuts")]);
    out.push_back(std::move(row));
  }
  return out;
}

FigureKind parse_figure_kind(std::string_view name) {
  if (name == "depth_map") return FigureKind::DepthMap;
  if (name == "residual_hist") return FigureKind::ResidualHist;
  if (name == "progress") return FigureKind::Progress;
  throw Error(ErrorCode::InvalidArgument, "unknown figure kind '" + std::string(name) + "'");
}

std::string export_figure_data(const ExecutionLog& log, FigureKind kind, int bins) {
  CsvTable t;
  switch (kind) {
    case FigureKind::DepthMap: {
      if (log.final_surface.size() == 0 || log.initial.size() == 0) {
        throw Error(ErrorCode::MissingData, "depth map needs the initial and final surfaces");
      }
      log.initial.require_same_grid(log.final_surface, "depth map");
      const GridSpec& g = log.final_surface.grid();
      t.header.push_back("y\\x");
      for (int i = 0; i < g.nx; ++i) t.header.push_back(format_double(g.x(i)));
      for (int j = 0; j < g.ny; ++j) {
        std::vector<std::string> row{format_double(g.y(j))};
        for (int i = 0; i < g.nx; ++i) {
          const bool ok = log.initial.valid(i, j) && log.final_surface.valid(i, j);
          row.push_back(ok ? format_double(log.initial(i, j) - log.final_surface(i, j)) : kMissingMarker);
        }
        t.rows.push_back(std::move(row));
      }
      break;
    }
    case FigureKind::ResidualHist: {
      if (log.final_surface.size() == 0 || log.target.size() == 0) {
        throw Error(ErrorCode::MissingData, "residual histogram needs the final and target surfaces");
      }
      const auto e = signed_errors(log.final_surface, log.target);
      const Histogram h = make_histogram(e, bins);
      t.header = {"bin_lo", "bin_hi", "count"};
      for (std::size_t b = 0; b < h.counts.size(); ++b) {
        t.rows.push_back({format_double(h.edges[b]), format_double(h.edges[b + 1]), std::to_string(h.counts[b])});
      }
      break;
    }
    case FigureKind::Progress: {
      if (log.rounds.empty()) throw Error(ErrorCode::MissingData, "log has no rounds");
      t.header = {"round", "step", "residual_volume", "residual_fraction", "rmse"};
      for (const auto& r : log.rounds) {
        t.rows.push_back({std::to_string(r.round), std::to_string(r.after_step), format_double(r.residual_volume),
                          format_double(r.residual_fraction),
                          r.metrics ? format_double(r.metrics->rmse) : std::string(kMissingMarker)});
      }
      break;
    }
  }
  return format_csv(t);
}

}  // namespace laserplan

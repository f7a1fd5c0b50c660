#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "laserplan/calibration.hpp"
#include "laserplan/config.hpp"
#include "laserplan/crater_fit.hpp"
#include "laserplan/error.hpp"
#include "laserplan/io.hpp"
#include "laserplan/metrics.hpp"
#include "laserplan/perception.hpp"
#include "laserplan/planner.hpp"
#include "laserplan/run.hpp"

namespace fs = std::filesystem;
using namespace laserplan;
using nlohmann::json;

namespace {

enum Exit { kOk = 0, kOther = 1, kConfig = 2, kStall = 3, kConstraint = 4, kIo = 5 };

int exit_code(ErrorCode code) {
  switch (code) {
    case ErrorCode::ConfigError:
      return kConfig;
    case ErrorCode::Stalled:
    case ErrorCode::NoProgress:
      return kStall;
    case ErrorCode::ConstraintFault:
    case ErrorCode::PlantFault:
      return kConstraint;
    case ErrorCode::IoError:
      return kIo;
    default:
      return kOther;
  }
}

json metrics_json(const MetricReport& m) {
  return {{"rmse", m.rmse}, {"mae", m.mae}, {"pct_overcut", m.pct_overcut}, {"pct_undercut", m.pct_undercut},
          {"iou", m.iou}};
}

json transform_json(const RigidTransform& t) {
  json r = json::array();
  for (int a = 0; a < 3; ++a) r.push_back({t.rotation()(a, 0), t.rotation()(a, 1), t.rotation()(a, 2)});
  return {{"rotation", r}, {"translation", {t.translation().x(), t.translation().y(), t.translation().z()}}};
}

RunConfig run_config(const std::string& path, const std::string& out, const std::string& mode,
                     std::optional<std::uint64_t> seed) {
  RunConfig c = load_run_config(path);
  if (!out.empty()) c.output_dir = out;
  if (mode == "feedforward") c.mode = RunMode::Feedforward;
  if (mode == "feedback") c.mode = RunMode::Feedback;
  if (seed) {
    c.seed = *seed;
    c.planner.seed = *seed;
  }
  return c;
}

int cmd_scenario(const std::string& config, const std::string& out) {
  if (!fs::exists(config)) throw Error(ErrorCode::ConfigError, "scenario file not found: " + config);
  const ScenarioConfig sc = parse_scenario_config(read_text(config));
  const Scenario s = sc.materialize(PlannerConfig{}.clearance);
  const fs::path dir = resolve_output_dir(out);
  write_text_atomic(dir / "scenario.json", format_scenario_config(sc));
  write_heightfield(dir / "initial.hf", s.initial);
  write_heightfield(dir / "target.hf", s.target);
  write_heightfield(dir / "constraint.hf", s.constraint.ceiling);
  std::printf("scenario %s: objective %.3f mm^3, %zu constrained nodes -> %s\n", s.name.c_str(),
              objective_volume(s.initial, s.target), s.constraint.active_count(), dir.c_str());
  return kOk;
}

int cmd_fit(const std::string& cloud_path, std::optional<double> energy, std::optional<double> duty,
            const std::string& model, std::optional<double> fix_p, bool fit_phi, const std::string& out) {
  if (energy.has_value() == duty.has_value()) throw Error(ErrorCode::ConfigError, "give exactly one of --energy, --duty");
  const double e = energy ? *energy : energy_for_duty(EnergyTable{}, *duty);
  FitOptions opt;
  if (model == "gaussian") {
    opt.model = CraterModel::Gaussian;
  } else if (model != "super_gaussian") {
    throw Error(ErrorCode::ConfigError, "--model must be super_gaussian or gaussian");
  }
  opt.fix_P = fix_p;
  opt.fit_phi = fit_phi;
  const FitResult r = fit_crater(parse_point_cloud_csv(read_text(cloud_path)), e, opt);
  write_text_atomic(resolve_output_dir(out), format_fit_result(r.params, r.mu, r.rmse, e));
  std::printf("A=%.6g sigma=%.6g P=%.6g phi=%.6g rmse=%.4g mm (%zu inliers)\n", r.params.A, r.params.sigma,
              r.params.P, r.params.phi, r.rmse, r.inlier_count);
  return kOk;
}

int cmd_plan(const RunConfig& c) {
  const Scenario s = c.scenario.materialize(c.planner.clearance);
  const EnergyTable table;
  FeedforwardPlan plan;
  int code = kOk;
  try {
    plan = plan_feedforward(s.initial, s.target, s.constraint, c.laser, table, c.planner);
  } catch (const PlanStalled& e) {
    std::cerr << e.what() << "\n";
    plan = e.partial();
    code = kStall;
  }
  std::vector<CutRecord> records;
  for (std::size_t k = 0; k < plan.cuts.size(); ++k) {
    records.push_back({static_cast<int>(k) + 1, plan.cuts[k], plan.predicted_costs[k], 0, 0.0});
  }
  const fs::path dir = resolve_output_dir(c.output_dir);
  write_text_atomic(dir / "config.json", format_run_config(c));
  write_text_atomic(dir / "cuts.csv", format_cuts_csv(records));
  write_heightfield(dir / "predicted.hf", plan.predicted);
  const MetricReport m = compute_metrics(plan.predicted, s.target, s.initial);
  json j{{"format_version", kFormatVersion}, {"seed", c.seed},         {"cuts", plan.cuts.size()},
         {"terminated", plan.terminated},     {"objective_volume", plan.objective_volume},
         {"predicted", metrics_json(m)}};
  write_text_atomic(dir / "metrics.json", j.dump(2) + "\n");
  std::printf("%zu cuts, predicted RMSE %.3f mm, IoU %.3f -> %s\n", plan.cuts.size(), m.rmse, m.iou, dir.c_str());
  return code;
}

int cmd_simulate(const RunConfig& c) {
  const ExecutionLog log = run(c);
  const MetricReport& m = *log.final_metrics;
  std::printf("%s: %zu cuts, %zu scans, RMSE %.3f mm, MAE %.3f mm, OC %.1f%%, UC %.1f%%, IoU %.3f -> %s\n",
              log.mode.c_str(), log.cuts.size(), log.observation_count(), m.rmse, m.mae, m.pct_overcut,
              m.pct_undercut, m.iou, resolve_output_dir(c.output_dir).c_str());
  return kOk;
}

int cmd_calibrate(const std::string& pairs_path, const std::string& craters_path, double focal_distance,
                  const std::string& out) {
  const fs::path dir = resolve_output_dir(out);
  const auto pairs = parse_pose_pairs_csv(read_text(pairs_path));
  const RigidTransform x = solve_hand_eye(pairs);
  json result{{"hand_eye", transform_json(x)}};
  CsvTable pair_err;
  pair_err.header = {"pair", "rotation_deg", "translation_mm"};
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    const RigidTransform d = (pairs[k].A * x).inverse() * (x * pairs[k].B);
    pair_err.rows.push_back({std::to_string(k), format_double(d.angle() * 180.0 / 3.141592653589793),
                             format_double(d.translation().norm())});
  }
  write_text_atomic(dir / "pair_errors.csv", format_csv(pair_err));
  if (!craters_path.empty()) {
    const auto centers = parse_crater_centers_csv(read_text(craters_path));
    const LaserAxis axis = fit_laser_axis(centers, focal_distance);
    result["laser_axis"] = {
        {"direction", {axis.direction.x(), axis.direction.y(), axis.direction.z()}},
        {"focal_point", {axis.focal_point.x(), axis.focal_point.y(), axis.focal_point.z()}},
        {"focal_distance", axis.focal_distance}};
    CsvTable crater_err;
    crater_err.header = {"crater", "distance_mm"};
    for (std::size_t k = 0; k < centers.size(); ++k) {
      const Eigen::Vector3d p(centers[k].c.x(), centers[k].c.y(), centers[k].z);
      const Eigen::Vector3d v = p - axis.focal_point;
      crater_err.rows.push_back({std::to_string(k), format_double((v - v.dot(axis.direction) * axis.direction).norm())});
    }
    write_text_atomic(dir / "crater_errors.csv", format_csv(crater_err));
  }
  write_text_atomic(dir / "calibration.json", result.dump(2) + "\n");
  std::printf("X translation [%.4f %.4f %.4f] mm, rotation %.4f deg -> %s\n", x.translation().x(),
              x.translation().y(), x.translation().z(), x.angle() * 180.0 / 3.141592653589793, dir.c_str());
  return kOk;
}

int cmd_segment(const std::string& cloud_path, double eps, int min_points, std::optional<int> label,
                double clearance, double spacing, const std::string& out) {
  const fs::path dir = resolve_output_dir(out);
  PointCloud3 cloud = parse_point_cloud_csv(read_text(cloud_path));
  const ClusterResult r = dbscan(cloud, eps, min_points);
  cloud.labels = r.labels;
  write_text_atomic(dir / "labeled.csv", format_point_cloud_csv(cloud));
  std::printf("%d clusters\n", r.cluster_count);
  if (r.cluster_count == 0) return kOk;
  int chosen = 0;
  if (label) {
    chosen = *label;
  } else {
    std::vector<std::size_t> count(static_cast<std::size_t>(r.cluster_count), 0);
    for (int l : r.labels) {
      if (l >= 0) ++count[static_cast<std::size_t>(l)];
    }
    chosen = static_cast<int>(std::max_element(count.begin(), count.end()) - count.begin());
  }
  Eigen::Vector2d lo(1e300, 1e300), hi(-1e300, -1e300);
  for (const auto& p : cloud.points) {
    lo = lo.cwiseMin(p.head<2>());
    hi = hi.cwiseMax(p.head<2>());
  }
  const GridSpec grid = GridSpec::covering(lo, (hi - lo).cwiseMax(spacing), spacing);
  const ConstraintField f = constraint_from_cluster(cloud, chosen, clearance, grid);
  write_heightfield(dir / "constraint.hf", f.ceiling);
  std::printf("cluster %d: %zu constrained nodes -> %s\n", chosen, f.active_count(), dir.c_str());
  return kOk;
}

int cmd_report(const std::vector<std::string>& runs, const std::string& out, bool figures) {
  std::vector<ExecutionLog> logs;
  for (const auto& r : runs) {
    logs.push_back(load_run(r));
    if (figures) {
      for (const char* kind : {"depth_map", "residual_hist", "progress"}) {
        write_text_atomic(fs::path(r) / (std::string(kind) + ".csv"),
                          export_figure_data(logs.back(), parse_figure_kind(kind)));
      }
    }
  }
  const std::string csv = report_compare(logs);
  if (out.empty()) {
    std::cout << csv;
  } else {
    write_text_atomic(resolve_output_dir(out), csv);
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Laser resection planning: scenarios, crater fits, plans, simulation, calibration, segmentation"};
  app.require_subcommand(1);

  std::string config, mode;
  std::string scenario_out, fit_out, run_out, calib_out, segment_out, report_out;
  std::optional<std::uint64_t> seed;

  auto* scenario = app.add_subcommand("scenario", "materialize a scenario file into heightfields");
  scenario->add_option("config", config, "scenario JSON")->required();
  scenario->add_option("-o,--out", scenario_out, "output directory")->default_val("scenario");

  std::string cloud;
  std::optional<double> energy, duty, fix_p;
  std::string model = "super_gaussian";
  bool fit_phi = false;
  auto* fit = app.add_subcommand("fit", "fit crater parameters to a scanned crater");
  fit->add_option("cloud", cloud, "point cloud CSV (x,y,z)")->required()->check(CLI::ExistingFile);
  fit->add_option("--energy", energy, "pulse energy (J)");
  fit->add_option("--duty", duty, "duty cycle (%)");
  fit->add_option("--model", model, "super_gaussian or gaussian");
  fit->add_option("--fix-p", fix_p, "hold P fixed");
  fit->add_flag("--fit-phi", fit_phi, "also fit the ablation threshold");
  fit->add_option("-o,--out", fit_out, "fit result JSON")->default_val("fit.json");

  auto* plan = app.add_subcommand("plan", "plan a feedforward cut sequence on the model");
  plan->add_option("config", config, "run JSON")->required();
  plan->add_option("-o,--out", run_out, "output directory (overrides the config)");
  plan->add_option("--seed", seed, "seed (overrides the config)");

  auto* simulate = app.add_subcommand("simulate", "plan and execute against the virtual plant");
  simulate->add_option("config", config, "run JSON")->required();
  simulate->add_option("-o,--out", run_out, "output directory (overrides the config)");
  simulate->add_option("--mode", mode, "feedforward or feedback (overrides the config)")
      ->check(CLI::IsMember({"feedforward", "feedback"}));
  simulate->add_option("--seed", seed, "seed (overrides the config)");

  std::string pairs, craters;
  double focal = 0.0;
  auto* calibrate = app.add_subcommand("calibrate", "hand-eye and laser-axis calibration");
  calibrate->add_option("pairs", pairs, "pose-pair CSV")->required()->check(CLI::ExistingFile);
  calibrate->add_option("--craters", craters, "crater-centre CSV (cx,cy,z)")->check(CLI::ExistingFile);
  calibrate->add_option("--focal-distance", focal, "height of the focal plane (mm)");
  calibrate->add_option("-o,--out", calib_out, "output directory")->default_val("calibration");

  double eps = 0.1, clearance = 0.2, spacing = 0.05;
  int min_points = 10;
  std::optional<int> label;
  auto* segment = app.add_subcommand("segment", "cluster a point cloud and derive a constraint ceiling");
  segment->add_option("cloud", cloud, "point cloud CSV (x,y,z)")->required()->check(CLI::ExistingFile);
  segment->add_option("--eps", eps, "neighbourhood radius (mm)");
  segment->add_option("--min-points", min_points, "points for a core point, itself included");
  segment->add_option("--label", label, "cluster to protect (default: the largest)");
  segment->add_option("--clearance", clearance, "margin above the structure (mm)");
  segment->add_option("--spacing", spacing, "ceiling grid spacing (mm)");
  segment->add_option("-o,--out", segment_out, "output directory")->default_val("segment");

  std::vector<std::string> runs;
  bool figures = false;
  auto* report = app.add_subcommand("report", "compare runs and export figure data");
  report->add_option("runs", runs, "run directories")->required()->check(CLI::ExistingDirectory);
  report->add_option("-o,--out", report_out, "comparison CSV (default: stdout)");
  report->add_flag("--figures", figures, "write depth_map, residual_hist and progress CSVs into each run");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfig;
  }

  try {
    if (*scenario) return cmd_scenario(config, scenario_out);
    if (*fit) return cmd_fit(cloud, energy, duty, model, fix_p, fit_phi, fit_out);
    if (*plan) return cmd_plan(run_config(config, run_out, "", seed));
    if (*simulate) return cmd_simulate(run_config(config, run_out, mode, seed));
    if (*calibrate) return cmd_calibrate(pairs, craters, focal, calib_out);
    if (*segment) return cmd_segment(cloud, eps, min_points, label, clearance, spacing, segment_out);
    if (*report) return cmd_report(runs, report_out, figures);
  } catch (const Error& e) {
    std::cerr << "laserplan: " << e.what() << "\n";
    return exit_code(e.code());
  } catch (const std::exception& e) {
    std::cerr << "laserplan: " << e.what() << "\n";
    return kOther;
  }
  return kOk;
}

#include "laserplan/config.hpp"

#include <set>

#include <json.hpp>

#include "laserplan/error.hpp"
#include "laserplan/io.hpp"

namespace laserplan {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

[[noreturn]] void config_error(const std::string& what) { throw Error(ErrorCode::ConfigError, what); }

// Reads fields from one JSON object and rejects keys nobody asked for.
class Fields {
 public:
  Fields(const json& j, std::string where) : j_(j), where_(std::move(where)) {
    if (!j.is_object()) config_error(where_ + ": expected an object");
  }

  bool has(const std::string& key) {
    seen_.insert(key);
    return j_.contains(key);
  }

  const json& at(const std::string& key) {
    seen_.insert(key);
    if (!j_.contains(key)) config_error(where_ + ": missing '" + key + "'");
    return j_.at(key);
  }

  template <typename T>
  void get(const std::string& key, T& out) {
    if (!has(key)) return;
    try {
      out = j_.at(key).get<T>();
    } catch (const json::exception&) {
      config_error(where_ + "." + key + ": wrong type");
    }
  }

  void vec2(const std::string& key, Eigen::Vector2d& out) {
    if (!has(key)) return;
    const json& v = j_.at(key);
    if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number()) {
      config_error(where_ + "." + key + ": expected [x, y]");
    }
    out = {v[0].get<double>(), v[1].get<double>()};
  }

  void vec3(const std::string& key, Eigen::Vector3d& out) {
    if (!has(key)) return;
    const json& v = j_.at(key);
    if (!v.is_array() || v.size() != 3 || !v[0].is_number() || !v[1].is_number() || !v[2].is_number()) {
      config_error(where_ + "." + key + ": expected [x, y, z]");
    }
    out = {v[0].get<double>(), v[1].get<double>(), v[2].get<double>()};
  }

  void finish() const {
    for (const auto& [key, value] : j_.items()) {
      if (!seen_.count(key)) config_error(where_ + ": unknown key '" + key + "'");
    }
  }

 private:
  const json& j_;
  std::string where_;
  std::set<std::string> seen_;
};

json parse_json(std::string_view text, const std::string& what) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    config_error(what + ": " + e.what());
  }
}

// Re-throws library validation failures as configuration errors.
template <typename F>
void validated(const std::string& what, F&& f) {
  try {
    f();
  } catch (const Error& e) {
    config_error(what + ": " + e.what());
  }
}

ScenarioConfig scenario_from(const json& j) {
  ScenarioConfig c;
  Fields f(j, "scenario");
  f.get("name", c.name);
  f.get("seed", c.seed);
  f.get("scan_noise", c.scan_noise);
  if (f.has("workspace")) {
    Fields w(f.at("workspace"), "scenario.workspace");
    w.vec2("size", c.workspace.size);
    w.get("spacing", c.workspace.spacing);
    w.get("surface_height", c.workspace.surface_height);
    w.finish();
  }
  {
    Fields g(f.at("generator"), "scenario.generator");
    std::string type;
    g.get("type", type);
    if (type == "square_well") {
      c.generator = Generator::SquareWell;
      g.vec2("size", c.well_size);
      g.get("depth", c.depth);
    } else if (type == "spline_tumor") {
      c.generator = Generator::SplineTumor;
      g.get("mean_radius", c.mean_radius);
      g.get("jitter", c.jitter);
      g.get("max_depth", c.max_depth);
    } else {
      config_error("scenario.generator.type: expected square_well or spline_tumor, got '" + type + "'");
    }
    g.finish();
  }
  if (f.has("subsurface") && !f.at("subsurface").is_null()) {
    SubsurfaceConfig s;
    Fields sf(f.at("subsurface"), "scenario.subsurface");
    sf.vec3("center", s.center);
    sf.get("radius", s.radius);
    if (sf.has("clearance")) {
      double v = 0.0;
      sf.get("clearance", v);
      s.clearance = v;
    }
    sf.finish();
    c.subsurface = s;
  }
  if (f.has("mismatch")) {
    Fields m(f.at("mismatch"), "scenario.mismatch");
    m.get("defocus_coeff", c.mismatch.defocus_coeff);
    m.get("debris_attenuation", c.mismatch.debris_attenuation);
    m.get("reset_every", c.mismatch.reset_every);
    m.finish();
  }
  f.finish();
  validated("scenario.mismatch", [&] { c.mismatch.validate(); });
  if (!(c.scan_noise >= 0.0)) config_error("scenario.scan_noise must be >= 0");
  if (!(c.workspace.spacing > 0.0)) config_error("scenario.workspace.spacing must be > 0");
  return c;
}

json scenario_to(const ScenarioConfig& c) {
  json j;
  j["name"] = c.name;
  j["seed"] = c.seed;
  j["scan_noise"] = c.scan_noise;
  j["workspace"] = {{"size", {c.workspace.size.x(), c.workspace.size.y()}},
                    {"spacing", c.workspace.spacing},
                    {"surface_height", c.workspace.surface_height}};
  if (c.generator == Generator::SquareWell) {
    j["generator"] = {{"type", "square_well"}, {"size", {c.well_size.x(), c.well_size.y()}}, {"depth", c.depth}};
  } else {
    j["generator"] = {{"type", "spline_tumor"},
                      {"mean_radius", c.mean_radius},
                      {"jitter", c.jitter},
                      {"max_depth", c.max_depth}};
  }
  if (c.subsurface) {
    json s{{"center", {c.subsurface->center.x(), c.subsurface->center.y(), c.subsurface->center.z()}},
           {"radius", c.subsurface->radius}};
    if (c.subsurface->clearance) s["clearance"] = *c.subsurface->clearance;
    j["subsurface"] = s;
  }
  j["mismatch"] = {{"defocus_coeff", c.mismatch.defocus_coeff},
                   {"debris_attenuation", c.mismatch.debris_attenuation},
                   {"reset_every", c.mismatch.reset_every}};
  return j;
}

LaserParams laser_from(const json& j, const std::string& where) {
  LaserParams p;
  Fields f(j, where);
  f.get("A", p.A);
  f.get("sigma", p.sigma);
  f.get("P", p.P);
  f.get("phi", p.phi);
  f.finish();
  validated(where, [&] { p.validate(); });
  return p;
}

fs::path resolve(const fs::path& p, const fs::path& base) { return p.is_absolute() ? p : base / p; }

}  // namespace

Scenario ScenarioConfig::materialize(double default_clearance) const {
  Scenario s = generator == Generator::SquareWell ? make_square_well(well_size, depth, workspace)
                                                  : make_spline_tumor(mean_radius, jitter, max_depth, seed, workspace);
  s.name = name;
  if (subsurface) {
    s = make_subsurface_constraint(std::move(s), subsurface->center, subsurface->radius,
                                   subsurface->clearance.value_or(default_clearance));
  }
  return s;
}

ScenarioConfig parse_scenario_config(std::string_view json_text) {
  return scenario_from(parse_json(json_text, "scenario config"));
}

std::string format_scenario_config(const ScenarioConfig& config) { return scenario_to(config).dump(2) + "\n"; }

std::string_view to_string(RunMode mode) { return mode == RunMode::Feedforward ? "feedforward" : "feedback"; }

RunConfig parse_run_config(std::string_view json_text, const fs::path& base_dir) {
  const json j = parse_json(json_text, "run config");
  RunConfig c;
  Fields f(j, "run");
  const json& scen = f.at("scenario");
  if (scen.is_string()) {
    c.scenario_path = resolve(scen.get<std::string>(), base_dir);
    if (!fs::exists(c.scenario_path)) config_error("scenario file not found: " + c.scenario_path.string());
    std::string text;
    try {
      text = read_text(c.scenario_path);
    } catch (const Error& e) {
      config_error(e.what());
    }
    c.scenario = parse_scenario_config(text);
  } else {
    c.scenario = scenario_from(scen);
  }

  if (f.has("laser")) {
    const json& l = f.at("laser");
    if (l.is_object() && l.contains("fit_result")) {
      Fields lf(l, "laser");
      std::string path;
      lf.get("fit_result", path);
      lf.finish();
      c.laser_fit_path = resolve(path, base_dir);
      if (!fs::exists(*c.laser_fit_path)) config_error("fit result not found: " + c.laser_fit_path->string());
      try {
        c.laser = parse_fit_result(read_text(*c.laser_fit_path));
      } catch (const Error& e) {
        config_error(e.what());
      }
    } else {
      c.laser = laser_from(l, "laser");
    }
  }

  if (f.has("planner")) {
    PlannerConfig& p = c.planner;
    Fields pf(f.at("planner"), "planner");
    pf.get("k_F", p.k_F);
    pf.get("lambda", p.lambda);
    if (pf.has("lambda_side")) {
      std::string side;
      pf.get("lambda_side", side);
      if (side == "overcut") {
        p.lambda_side = WeightedSide::Overcut;
      } else if (side == "undercut") {
        p.lambda_side = WeightedSide::Undercut;
      } else {
        config_error("planner.lambda_side: expected overcut or undercut");
      }
    }
    pf.get("m", p.m);
    pf.get("tilt_limit_deg", p.tilt_limit_deg);
    if (pf.has("duty_range")) {
      Eigen::Vector2d d;
      pf.vec2("duty_range", d);
      p.duty_range = {d.x(), d.y()};
    }
    pf.get("clearance", p.clearance);
    pf.get("termination_fraction", p.termination_fraction);
    pf.get("selection_temperature", p.selection_temperature);
    pf.get("residual_tolerance", p.residual_tolerance);
    pf.get("stall_trees", p.stall_trees);
    pf.get("max_cuts", p.max_cuts);
    pf.get("batch", p.batch);
    if (pf.has("tilt_model")) {
      std::string tm;
      pf.get("tilt_model", tm);
      if (tm == "beam_aligned") {
        p.tilt_model = TiltModel::BeamAligned;
      } else if (tm == "normal_projection") {
        p.tilt_model = TiltModel::NormalProjection;
      } else {
        config_error("planner.tilt_model: expected beam_aligned or normal_projection");
      }
    }
    if (pf.has("parallel")) {
      bool par = false;
      pf.get("parallel", par);
      p.policy = par ? ExecutionPolicy::Parallel : ExecutionPolicy::Sequential;
    }
    pf.finish();
  }

  if (f.has("mode")) {
    std::string mode;
    f.get("mode", mode);
    if (mode == "feedforward") {
      c.mode = RunMode::Feedforward;
    } else if (mode == "feedback") {
      c.mode = RunMode::Feedback;
    } else {
      config_error("mode: expected feedforward or feedback, got '" + mode + "'");
    }
  }
  if (f.has("output_dir")) {
    std::string out;
    f.get("output_dir", out);
    c.output_dir = out;
  }
  f.get("seed", c.seed);
  f.finish();
  c.planner.seed = c.seed;
  validated("planner", [&] { c.planner.validate(); });
  return c;
}

RunConfig load_run_config(const fs::path& path) {
  if (!fs::exists(path)) config_error("config file not found: " + path.string());
  std::string text;
  try {
    text = read_text(path);
  } catch (const Error& e) {
    config_error(e.what());
  }
  return parse_run_config(text, path.parent_path());
}

std::string format_run_config(const RunConfig& c) {
  const PlannerConfig& p = c.planner;
  json j;
  j["scenario"] = scenario_to(c.scenario);
  j["laser"] = {{"A", c.laser.A}, {"sigma", c.laser.sigma}, {"P", c.laser.P}, {"phi", c.laser.phi}};
  j["planner"] = {{"k_F", p.k_F},
                  {"lambda", p.lambda},
                  {"lambda_side", p.lambda_side == WeightedSide::Overcut ? "overcut" : "undercut"},
                  {"m", p.m},
                  {"tilt_limit_deg", p.tilt_limit_deg},
                  {"duty_range", {p.duty_range.first, p.duty_range.second}},
                  {"clearance", p.clearance},
                  {"termination_fraction", p.termination_fraction},
                  {"selection_temperature", p.selection_temperature},
                  {"residual_tolerance", p.residual_tolerance},
                  {"stall_trees", p.stall_trees},
                  {"max_cuts", p.max_cuts},
                  {"batch", p.batch},
                  {"tilt_model", p.tilt_model == TiltModel::BeamAligned ? "beam_aligned" : "normal_projection"},
                  {"parallel", p.policy == ExecutionPolicy::Parallel}};
  j["mode"] = std::string(to_string(c.mode));
  j["output_dir"] = c.output_dir.string();
  j["seed"] = c.seed;
  return j.dump(2) + "\n";
}

std::string format_fit_result(const LaserParams& params, const Eigen::Vector2d& mu, double rmse, double energy) {
  json j{{"A", params.A},       {"sigma", params.sigma}, {"P", params.P},
         {"phi", params.phi},   {"mu", {mu.x(), mu.y()}}, {"rmse", rmse},
         {"energy", energy}};
  return j.dump(2) + "\n";
}

LaserParams parse_fit_result(std::string_view json_text) {
  const json j = parse_json(json_text, "fit result");
  if (!j.is_object()) config_error("fit result: expected an object");
  LaserParams p;
  try {
    p.A = j.at("A").get<double>();
    p.sigma = j.at("sigma").get<double>();
    p.P = j.at("P").get<double>();
    p.phi = j.at("phi").get<double>();
  } catch (const json::exception& e) {
    config_error(std::string("fit result: ") + e.what());
  }
  validated("fit result", [&] { p.validate(); });
  return p;
}

}  // namespace laserplan

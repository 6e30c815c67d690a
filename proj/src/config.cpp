#include "spd/config.hpp"

#include <filesystem>
#include <initializer_list>
#include <set>

#include "spd/errors.hpp"
#include "spd/io_util.hpp"

namespace spd::io {

using nlohmann::ordered_json;
using Json = nlohmann::json;

const char* to_string(Command c) {
  switch (c) {
    case Command::trajectory: return "trajectory";
    case Command::error_sweep: return "error-sweep";
    case Command::monte_carlo: return "monte-carlo";
    case Command::sensitivity: return "sensitivity";
    case Command::grasp_cmd: return "grasp";
    default: return "decompose";
  }
}

Command command_from_string(const std::string& name) {
  if (name == "trajectory") return Command::trajectory;
  if (name == "error-sweep") return Command::error_sweep;
  if (name == "monte-carlo") return Command::monte_carlo;
  if (name == "sensitivity") return Command::sensitivity;
  if (name == "grasp") return Command::grasp_cmd;
  if (name == "decompose") return Command::decompose;
  throw ConfigError("unknown command: " + name);
}

ProjectConfig default_config() {
  ProjectConfig cfg;
  cfg.gripper.sp = cfg.sp;
  return cfg;
}

namespace {

// Strict-mode accessor for one JSON object: every key must be consumed, and
// every failure message carries the config path of the offending key.
class Section {
 public:
  Section(const Json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) {
      throw ConfigError("schema violation: " + path_ + " must be an object");
    }
  }

  ~Section() = default;

  bool has(const std::string& key) {
    seen_.insert(key);
    return j_.contains(key);
  }

  void finish() const {
    for (const auto& [key, value] : j_.items()) {
      if (seen_.find(key) == seen_.end()) {
        throw ConfigError("unknown key: " + path_ + "." + key);
      }
    }
  }

  double number(const std::string& key, double fallback) {
    if (!has(key)) return fallback;
    const Json& v = j_.at(key);
    if (!v.is_number()) {
      throw ConfigError("schema violation: " + path_ + "." + key + " must be a number");
    }
    return v.get<double>();
  }

  double positive(const std::string& key, double fallback) {
    const double v = number(key, fallback);
    if (!(v > 0.0)) {
      throw ConfigError("out of range: " + path_ + "." + key + " must be > 0");
    }
    return v;
  }

  double nonnegative(const std::string& key, double fallback) {
    const double v = number(key, fallback);
    if (v < 0.0) {
      throw ConfigError("out of range: " + path_ + "." + key + " must be >= 0");
    }
    return v;
  }

  std::uint64_t uinteger(const std::string& key, std::uint64_t fallback) {
    if (!has(key)) return fallback;
    const Json& v = j_.at(key);
    if (!v.is_number_integer() ||
        (!v.is_number_unsigned() && v.get<std::int64_t>() < 0)) {
      throw ConfigError("out of range: " + path_ + "." + key +
                        " must be a nonnegative integer");
    }
    return v.get<std::uint64_t>();
  }

  bool boolean(const std::string& key, bool fallback) {
    if (!has(key)) return fallback;
    const Json& v = j_.at(key);
    if (!v.is_boolean()) {
      throw ConfigError("schema violation: " + path_ + "." + key + " must be a boolean");
    }
    return v.get<bool>();
  }

  std::string text(const std::string& key, const std::string& fallback) {
    if (!has(key)) return fallback;
    const Json& v = j_.at(key);
    if (!v.is_string()) {
      throw ConfigError("schema violation: " + path_ + "." + key + " must be a string");
    }
    return v.get<std::string>();
  }

  geom::Vec2 vec2(const std::string& key, geom::Vec2 fallback) {
    if (!has(key)) return fallback;
    const Json& v = j_.at(key);
    if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number()) {
      throw ConfigError("schema violation: " + path_ + "." + key +
                        " must be a [x, y] number pair");
    }
    return {v[0].get<double>(), v[1].get<double>()};
  }

  const Json& raw(const std::string& key) {
    has(key);
    return j_.at(key);
  }

  const std::string& path() const { return path_; }

 private:
  const Json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

error_model::Distribution parse_distribution(const Json& j, const std::string& path,
                                             error_model::Distribution fallback) {
  Section s(j, path);
  error_model::Distribution d;
  d.mean = s.number("mean", fallback.mean);
  d.std = s.number("std", fallback.std);
  if (d.std < 0.0) {
    throw ConfigError("out of range: " + path + ".std must be >= 0");
  }
  s.finish();
  return d;
}

grasp::ObjectProfile parse_object(const Json& j, const std::string& path) {
  Section s(j, path);
  const std::string shape = s.text("shape", "circle");
  grasp::ObjectProfile obj;
  if (shape == "circle") {
    const geom::Vec2 center = s.vec2("center", {0.0, 10.0});
    const double radius = s.positive("radius", 10.0);
    s.finish();
    obj = grasp::ObjectProfile::make_circle(center, radius);
  } else if (shape == "polygon") {
    if (!s.has("vertices")) {
      throw ConfigError("schema violation: " + path + ".vertices required for polygons");
    }
    const Json& verts = s.raw("vertices");
    if (!verts.is_array() || verts.size() < 3) {
      throw ConfigError("schema violation: " + path +
                        ".vertices must be an array of at least 3 [x, y] pairs");
    }
    std::vector<geom::Vec2> vs;
    for (const Json& v : verts) {
      if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number()) {
        throw ConfigError("schema violation: " + path +
                          ".vertices entries must be [x, y] number pairs");
      }
      vs.push_back({v[0].get<double>(), v[1].get<double>()});
    }
    s.finish();
    try {
      obj = grasp::ObjectProfile::make_polygon(std::move(vs));
    } catch (const Error& e) {
      throw ConfigError("out of range: " + path + ".vertices: " + e.what());
    }
  } else {
    throw ConfigError("out of range: " + path + ".shape must be circle or polygon");
  }
  return obj;
}

}  // namespace

ProjectConfig parse_config(const std::string& json_text) {
  Json doc;
  try {
    doc = Json::parse(json_text);
  } catch (const Json::parse_error& e) {
    throw ConfigError(std::string("malformed config: ") + e.what());
  }
  if (!doc.is_object()) {
    throw ConfigError("malformed config: top level must be an object");
  }

  ProjectConfig cfg = default_config();
  Section root(doc, "$");

  if (root.has("peaucellier")) {
    Section s(root.raw("peaucellier"), "peaucellier");
    auto& p = cfg.peaucellier;
    p.fixed_pivot_e = s.vec2("fixed_pivot", p.fixed_pivot_e);
    p.crank_pivot_a = s.vec2("crank_pivot", p.crank_pivot_a);
    p.crank_len = s.positive("crank_len", p.crank_len);
    p.long_len = s.positive("long_len", p.long_len);
    p.short_len = s.positive("short_len", p.short_len);
    s.finish();
    try {
      p.validate();
    } catch (const Error& e) {
      throw ConfigError(std::string("out of range: peaucellier: ") + e.what());
    }
  }

  if (root.has("sp_linkage")) {
    Section s(root.raw("sp_linkage"), "sp_linkage");
    auto& p = cfg.sp;
    p.base = geom::make_pose(s.vec2("base_position", p.base.position),
                             s.number("base_orientation_rad", p.base.orientation));
    p.station_spacing_be = s.positive("station_spacing_be", p.station_spacing_be);
    p.station_spacing_bd = s.positive("station_spacing_bd", p.station_spacing_bd);
    p.link_l2_len = s.positive("link_l2_len", p.link_l2_len);
    p.link_l3_len = s.positive("link_l3_len", p.link_l3_len);
    p.slider_axis = s.vec2("slider_axis", p.slider_axis);
    p.drive_radius = s.positive("drive_radius", p.drive_radius);
    p.crank_pivot = s.vec2("crank_pivot", p.crank_pivot);
    p.rail_pin_offset = s.number("rail_pin_offset", p.rail_pin_offset);
    p.tension_spring_rest = s.positive("tension_spring_rest", p.tension_spring_rest);
    p.tension_spring_stiffness =
        s.positive("tension_spring_stiffness", p.tension_spring_stiffness);
    p.drive_min = s.number("drive_min_rad", p.drive_min);
    p.drive_max = s.number("drive_max_rad", p.drive_max);
    s.finish();
    try {
      p.validate();
    } catch (const Error& e) {
      throw ConfigError(std::string("out of range: sp_linkage: ") + e.what());
    }
    cfg.gripper.sp = cfg.sp;
  }

  if (root.has("gripper")) {
    Section s(root.raw("gripper"), "gripper");
    auto& g = cfg.gripper;
    g.palm_width = s.positive("palm_width", g.palm_width);
    g.carriage_height = s.positive("carriage_height", g.carriage_height);
    g.proximal_len = s.positive("proximal_len", g.proximal_len);
    g.distal_len = s.positive("distal_len", g.distal_len);
    g.idle_stroke = s.positive("idle_stroke_rad", g.idle_stroke);
    g.gear_ratio = s.positive("gear_ratio", g.gear_ratio);
    g.max_drive = s.positive("max_drive_rad", g.max_drive);
    g.pad = s.nonnegative("pad", g.pad);
    g.fingertip_zone = s.positive("fingertip_zone", g.fingertip_zone);
    g.max_opening = s.positive("max_opening", g.max_opening);
    g.psi_max = s.positive("psi_max_rad", g.psi_max);
    g.step_size = s.positive("step_rad", g.step_size);
    g.independent_drive = s.boolean("independent_drive", g.independent_drive);
    if (s.has("dpm")) {
      Section d(s.raw("dpm"), "gripper.dpm");
      g.dpm.loop1.long_side = d.positive("loop1_long", g.dpm.loop1.long_side);
      g.dpm.loop1.short_side = d.positive("loop1_short", g.dpm.loop1.short_side);
      g.dpm.loop2.long_side = d.positive("loop2_long", g.dpm.loop2.long_side);
      g.dpm.loop2.short_side = d.positive("loop2_short", g.dpm.loop2.short_side);
      g.dpm.fingertip_offset = d.vec2("fingertip_offset", g.dpm.fingertip_offset);
      d.finish();
    }
    s.finish();
    try {
      g.validate();
    } catch (const Error& e) {
      throw ConfigError(std::string("out of range: gripper: ") + e.what());
    }
  }

  if (root.has("error_params")) {
    Section s(root.raw("error_params"), "error_params");
    auto& e = cfg.error_params;
    e.link_len = s.positive("link_len", e.link_len);
    e.delta_len = s.number("delta_len", e.delta_len);
    e.clearance = s.nonnegative("clearance", e.clearance);
    e.friction_mu = s.nonnegative("friction_mu", e.friction_mu);
    e.noise_amp = s.nonnegative("noise_amp", e.noise_amp);
    auto& h = cfg.hysteresis;
    h.normal_force = s.positive("hysteresis_normal_force", h.normal_force);
    h.velocity = s.nonnegative("hysteresis_velocity", h.velocity);
    h.spring_stiffness = s.positive("hysteresis_spring_stiffness", h.spring_stiffness);
    s.finish();
    cfg.hysteresis.friction_mu = e.friction_mu;
  }

  if (root.has("distributions")) {
    Section s(root.raw("distributions"), "distributions");
    if (s.has("delta_l")) {
      cfg.distributions.delta_len = parse_distribution(s.raw("delta_l"),
                                                       "distributions.delta_l",
                                                       cfg.distributions.delta_len);
    }
    if (s.has("c")) {
      cfg.distributions.clearance =
          parse_distribution(s.raw("c"), "distributions.c", cfg.distributions.clearance);
    }
    if (s.has("mu")) {
      cfg.distributions.friction_mu = parse_distribution(
          s.raw("mu"), "distributions.mu", cfg.distributions.friction_mu);
    }
    s.finish();
  }

  if (root.has("run")) {
    Section s(root.raw("run"), "run");
    auto& r = cfg.run;
    if (s.has("command")) {
      r.command = command_from_string(s.text("command", "trajectory"));
    }
    r.out_dir = s.text("out_dir", r.out_dir);
    r.seed = s.uinteger("seed", r.seed);
    r.svg = s.boolean("svg", r.svg);
    r.mechanism = s.text("mechanism", r.mechanism);
    if (r.mechanism != "peaucellier" && r.mechanism != "sp") {
      throw ConfigError("out of range: run.mechanism must be peaucellier or sp");
    }
    r.steps = static_cast<std::size_t>(s.uinteger("steps", r.steps));
    r.samples = static_cast<std::size_t>(s.uinteger("samples", r.samples));
    r.grid = static_cast<std::size_t>(s.uinteger("grid", r.grid));
    r.theta_max = s.positive("theta_max_rad", r.theta_max);
    r.theta_ref = s.positive("theta_ref_rad", r.theta_ref);
    r.reference_crank_angle =
        s.number("reference_crank_angle_rad", r.reference_crank_angle);
    if (s.has("object")) {
      r.scenario.object = parse_object(s.raw("object"), "run.object");
    }
    r.scenario.opening = s.positive("opening", r.scenario.opening);
    s.finish();
  }

  root.finish();
  cfg.error_params.seed = cfg.run.seed;
  return cfg;
}

ProjectConfig load_config(const std::string& path) {
  if (!std::filesystem::exists(path)) {
    throw ConfigError("config file does not exist: " + path);
  }
  return parse_config(read_file(path));
}

ordered_json config_to_json(const ProjectConfig& cfg) {
  ordered_json j;
  j["peaucellier"] = {
      {"fixed_pivot", {cfg.peaucellier.fixed_pivot_e.x, cfg.peaucellier.fixed_pivot_e.y}},
      {"crank_pivot", {cfg.peaucellier.crank_pivot_a.x, cfg.peaucellier.crank_pivot_a.y}},
      {"crank_len", cfg.peaucellier.crank_len},
      {"long_len", cfg.peaucellier.long_len},
      {"short_len", cfg.peaucellier.short_len},
  };
  j["sp_linkage"] = {
      {"base_position", {cfg.sp.base.position.x, cfg.sp.base.position.y}},
      {"base_orientation_rad", cfg.sp.base.orientation},
      {"station_spacing_be", cfg.sp.station_spacing_be},
      {"station_spacing_bd", cfg.sp.station_spacing_bd},
      {"link_l2_len", cfg.sp.link_l2_len},
      {"link_l3_len", cfg.sp.link_l3_len},
      {"slider_axis", {cfg.sp.slider_axis.x, cfg.sp.slider_axis.y}},
      {"drive_radius", cfg.sp.drive_radius},
      {"crank_pivot", {cfg.sp.crank_pivot.x, cfg.sp.crank_pivot.y}},
      {"rail_pin_offset", cfg.sp.rail_pin_offset},
      {"tension_spring_rest", cfg.sp.tension_spring_rest},
      {"tension_spring_stiffness", cfg.sp.tension_spring_stiffness},
      {"drive_min_rad", cfg.sp.drive_min},
      {"drive_max_rad", cfg.sp.drive_max},
  };
  j["gripper"] = {
      {"palm_width", cfg.gripper.palm_width},
      {"carriage_height", cfg.gripper.carriage_height},
      {"proximal_len", cfg.gripper.proximal_len},
      {"distal_len", cfg.gripper.distal_len},
      {"idle_stroke_rad", cfg.gripper.idle_stroke},
      {"gear_ratio", cfg.gripper.gear_ratio},
      {"max_drive_rad", cfg.gripper.max_drive},
      {"pad", cfg.gripper.pad},
      {"fingertip_zone", cfg.gripper.fingertip_zone},
      {"max_opening", cfg.gripper.max_opening},
      {"psi_max_rad", cfg.gripper.psi_max},
      {"step_rad", cfg.gripper.step_size},
      {"independent_drive", cfg.gripper.independent_drive},
      {"dpm",
       {{"loop1_long", cfg.gripper.dpm.loop1.long_side},
        {"loop1_short", cfg.gripper.dpm.loop1.short_side},
        {"loop2_long", cfg.gripper.dpm.loop2.long_side},
        {"loop2_short", cfg.gripper.dpm.loop2.short_side},
        {"fingertip_offset",
         {cfg.gripper.dpm.fingertip_offset.x, cfg.gripper.dpm.fingertip_offset.y}}}},
  };
  j["error_params"] = {
      {"link_len", cfg.error_params.link_len},
      {"delta_len", cfg.error_params.delta_len},
      {"clearance", cfg.error_params.clearance},
      {"friction_mu", cfg.error_params.friction_mu},
      {"noise_amp", cfg.error_params.noise_amp},
      {"hysteresis_normal_force", cfg.hysteresis.normal_force},
      {"hysteresis_velocity", cfg.hysteresis.velocity},
      {"hysteresis_spring_stiffness", cfg.hysteresis.spring_stiffness},
  };
  j["distributions"] = {
      {"delta_l",
       {{"mean", cfg.distributions.delta_len.mean}, {"std", cfg.distributions.delta_len.std}}},
      {"c",
       {{"mean", cfg.distributions.clearance.mean}, {"std", cfg.distributions.clearance.std}}},
      {"mu",
       {{"mean", cfg.distributions.friction_mu.mean},
        {"std", cfg.distributions.friction_mu.std}}},
  };
  ordered_json object;
  if (cfg.run.scenario.object.shape == grasp::ObjectProfile::Shape::circle) {
    object = {{"shape", "circle"},
              {"center", {cfg.run.scenario.object.center.x, cfg.run.scenario.object.center.y}},
              {"radius", cfg.run.scenario.object.radius}};
  } else {
    ordered_json verts = ordered_json::array();
    for (const auto& v : cfg.run.scenario.object.vertices) {
      verts.push_back({v.x, v.y});
    }
    object = {{"shape", "polygon"}, {"vertices", verts}};
  }
  j["run"] = {
      {"command", to_string(cfg.run.command)},
      {"out_dir", cfg.run.out_dir},
      {"seed", cfg.run.seed},
      {"svg", cfg.run.svg},
      {"mechanism", cfg.run.mechanism},
      {"steps", cfg.run.steps},
      {"samples", cfg.run.samples},
      {"grid", cfg.run.grid},
      {"theta_max_rad", cfg.run.theta_max},
      {"theta_ref_rad", cfg.run.theta_ref},
      {"reference_crank_angle_rad", cfg.run.reference_crank_angle},
      {"object", object},
      {"opening", cfg.run.scenario.opening},
  };
  return j;
}

}  // namespace spd::io

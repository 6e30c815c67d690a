#include "spd/run.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <thread>

#include "spd/errors.hpp"
#include "spd/io_util.hpp"
#include "spd/rng.hpp"
#include "spd/svg.hpp"
#include "spd/version.hpp"

namespace spd::io {

namespace {

using nlohmann::ordered_json;

std::string out_path(const ProjectConfig& cfg, const std::string& name) {
  return (std::filesystem::path(cfg.run.out_dir) / name).string();
}

std::string num(double v) { return format_number(v); }

// Reference bench measurements of the modelled hardware; emitted for
// comparison in summaries, never asserted by the analysis itself.
ordered_json hardware_reference() {
  return ordered_json{
      {"max_error_below_5deg_mm", {{"measured", 0.12}, {"theoretical", 0.13}}},
      {"error_at_10deg_mm", {{"measured", 0.38}, {"theoretical", 0.35}}},
      {"growth_rate_increase_pct", 42.0},
      {"relative_error_pct", 8.6},
      {"geo_amplitude_mm", 0.15},
      {"clearance_skewness", 0.35},
      {"hysteresis_band_mm", 0.15},
      {"sensitivities", {{"delta_l", 0.42}, {"c", 0.31}, {"mu", 0.18}}},
  };
}

std::vector<double> linspace(double lo, double hi, std::size_t n) {
  std::vector<double> out(n);
  if (n == 1) {
    out[0] = lo;
    return out;
  }
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
  }
  return out;
}

double line_coordinate(const linkage::PeaucellierSpec& spec, double alpha) {
  const linkage::PeaucellierConfig cfg = linkage::peaucellier_fk(spec, alpha);
  const linkage::AnalyticLine line = linkage::peaucellier_output_line(spec);
  return geom::dot(cfg.d - spec.fixed_pivot_e, line.direction);
}

struct CommandResult {
  ordered_json results;
  std::vector<std::pair<std::string, std::string>> files;  // name -> content
  std::vector<std::pair<std::string, svg::SvgPlot>> plots;
};

// --------------------------------------------------------------------------
// trajectory
// --------------------------------------------------------------------------

double default_peaucellier_sweep_limit(const linkage::PeaucellierSpec& spec) {
  const double reach = (spec.long_len - spec.short_len) / (2.0 * spec.crank_len);
  if (2.0 * spec.crank_len > spec.long_len + spec.short_len) {
    throw ConfigError(
        "trajectory: no default sweep for cells with 2*crank_len > long_len + short_len");
  }
  if (reach >= 1.0) {
    throw ConfigError("trajectory: cell cannot assemble at any crank angle");
  }
  return 2.0 * std::acos(reach);
}

CommandResult run_trajectory(const ProjectConfig& cfg) {
  CommandResult out;
  const std::size_t steps = cfg.run.steps == 0
                                ? (cfg.run.mechanism == "sp" ? 500u : 360u)
                                : cfg.run.steps;
  const std::size_t n = steps + 1;

  linkage::Trace trace;
  if (cfg.run.mechanism == "sp") {
    trace = linkage::sp_sweep(cfg.sp, cfg.sp.drive_min, cfg.sp.drive_max, n);
  } else {
    const double limit = 0.95 * default_peaucellier_sweep_limit(cfg.peaucellier);
    trace = linkage::peaucellier_sweep(cfg.peaucellier, -limit, limit, n);
  }

  CsvBuilder csv({"phi_rad", "node", "x_mm", "y_mm"});
  for (const auto& sample : trace.samples) {
    for (const auto& [name, p] : sample.nodes) {
      csv.row({num(sample.drive), name, num(p.x), num(p.y)});
    }
  }
  out.files.emplace_back("trajectory.csv", csv.str());

  const geom::LineFit fit = linkage::straightness(trace, "D");
  double max_residual = 0.0;
  for (const auto& s : trace.samples) max_residual = std::max(max_residual, s.residual);

  out.results = ordered_json{
      {"mechanism", cfg.run.mechanism},
      {"samples", trace.size()},
      {"node_d_straightness",
       {{"max_dev_mm", fit.max_dev},
        {"rms_dev_mm", fit.rms_dev},
        {"direction", {fit.direction.x, fit.direction.y}},
        {"point", {fit.point.x, fit.point.y}}}},
      {"max_trace_residual", max_residual},
  };
  if (cfg.run.mechanism == "peaucellier") {
    double worst = 0.0;
    for (const auto& s : trace.samples) {
      worst = std::max(worst, s.residual);  // normalized by k^2 in the sweep
    }
    out.results["inversor_residual_max_rel"] = worst;
    const auto line = linkage::peaucellier_output_line(cfg.peaucellier);
    out.results["output_line"] = {{"point", {line.point.x, line.point.y}},
                                  {"direction", {line.direction.x, line.direction.y}}};
  }

  if (cfg.run.svg) {
    svg::SvgPlot plot;
    plot.title = cfg.run.mechanism == "sp" ? "Reduced-cell node paths"
                                           : "Inversor node paths";
    plot.x_label = "x [mm]";
    plot.y_label = "y [mm]";
    std::size_t idx = 0;
    const auto& names = trace.samples.front().nodes;
    for (const auto& [name, unused] : names) {
      svg::Polyline pl;
      pl.label = name;
      pl.color = svg::palette(idx++);
      for (const auto& s : trace.samples) pl.points.push_back(s.nodes.at(name));
      plot.series.push_back(std::move(pl));
    }
    out.plots.emplace_back("trajectory.svg", std::move(plot));
  }
  return out;
}

// --------------------------------------------------------------------------
// error-sweep
// --------------------------------------------------------------------------

CommandResult run_error_sweep(const ProjectConfig& cfg) {
  CommandResult out;
  const std::size_t n = (cfg.run.steps == 0 ? 100u : cfg.run.steps) + 1;
  const std::vector<double> thetas = linspace(0.0, cfg.run.theta_max, n);
  const std::vector<double> ideal_ys =
      ideal_y_profile(cfg.peaucellier, cfg.run.reference_crank_angle, thetas);

  CsvBuilder csv({"theta_rad", "geo_mm", "friction_mm", "clearance_mm", "random_mm",
                  "total_mm"});
  std::vector<geom::Vec2> totals, geos, frictions, clearances;
  for (std::size_t i = 0; i < n; ++i) {
    rng::NormalStream stream{cfg.run.seed, static_cast<std::uint64_t>(i), 0};
    const error_model::ErrorBreakdown b =
        error_model::total_y_error(cfg.error_params, thetas[i], ideal_ys[i], stream);
    csv.row({num(b.theta), num(b.geo), num(b.friction), num(b.clearance), num(b.random),
             num(b.total)});
    totals.push_back({b.theta, b.total});
    geos.push_back({b.theta, b.geo});
    frictions.push_back({b.theta, b.friction});
    clearances.push_back({b.theta, b.clearance});
  }
  out.files.emplace_back("error_sweep.csv", csv.str());

  out.results = ordered_json{
      {"theta_max_rad", cfg.run.theta_max},
      {"reference_crank_angle_rad", cfg.run.reference_crank_angle},
      {"ideal_y_at_theta_max_mm", ideal_ys.back()},
      {"x_real_at_theta_max_mm",
       error_model::x_real(cfg.error_params.link_len, cfg.error_params.delta_len,
                           cfg.run.theta_max)},
      {"hardware_reference", hardware_reference()},
  };
  try {
    const error_model::RegimeReport rep = error_model::regime_analysis(
        cfg.error_params, cfg.distributions, thetas, ideal_ys);
    out.results["regime"] = ordered_json{
        {"split_theta_rad", rep.split_theta},
        {"slope_below_mm_per_rad", rep.slope_below},
        {"slope_above_mm_per_rad", rep.slope_above},
        {"growth_ratio", rep.growth_ratio},
        {"max_below_mm", rep.max_below},
        {"max_below_3sigma_mm", rep.max_below_3sigma},
        {"max_above_mm", rep.max_above},
        {"max_above_3sigma_mm", rep.max_above_3sigma},
    };
  } catch (const KinematicsError&) {
    out.results["regime"] = nullptr;  // grid does not span both regimes
  }

  if (cfg.run.svg) {
    svg::SvgPlot plot;
    plot.title = "Error components over the stroke";
    plot.x_label = "theta [rad]";
    plot.y_label = "error [mm]";
    plot.series = {
        svg::Polyline{geos, svg::palette(0), 1.5, "geo"},
        svg::Polyline{frictions, svg::palette(1), 1.5, "friction"},
        svg::Polyline{clearances, svg::palette(2), 1.5, "clearance"},
        svg::Polyline{totals, svg::palette(3), 2.0, "total"},
    };
    out.plots.emplace_back("error_sweep.svg", std::move(plot));
  }
  return out;
}

// --------------------------------------------------------------------------
// monte-carlo
// --------------------------------------------------------------------------

CommandResult run_monte_carlo(const ProjectConfig& cfg) {
  CommandResult out;
  const std::size_t points = (cfg.run.steps == 0 ? 64u : cfg.run.steps) + 1;
  const std::size_t samples = cfg.run.samples == 0 ? 10000u : cfg.run.samples;
  const std::vector<double> thetas = linspace(0.0, cfg.run.theta_max, points);
  const std::vector<double> ideal_ys =
      ideal_y_profile(cfg.peaucellier, cfg.run.reference_crank_angle, thetas);

  const std::vector<error_model::ThetaStats> stats =
      error_model::monte_carlo(cfg.error_params, cfg.distributions, thetas, ideal_ys,
                               samples, cfg.run.seed, thread_cap());

  CsvBuilder csv({"theta_rad", "mean_mm", "std_mm", "p95_mm"});
  std::vector<geom::Vec2> means, p95s;
  double max_p95 = 0.0;
  for (const auto& s : stats) {
    csv.row({num(s.theta), num(s.mean), num(s.std), num(s.p95)});
    means.push_back({s.theta, s.mean});
    p95s.push_back({s.theta, s.p95});
    max_p95 = std::max(max_p95, s.p95);
  }
  out.files.emplace_back("monte_carlo.csv", csv.str());

  out.results = ordered_json{
      {"samples", samples},
      {"grid_points", points},
      {"max_p95_mm", max_p95},
      {"final_mean_mm", stats.back().mean},
      {"final_std_mm", stats.back().std},
      {"hardware_reference", hardware_reference()},
  };

  if (cfg.run.svg) {
    svg::SvgPlot plot;
    plot.title = "Monte Carlo vertical error";
    plot.x_label = "theta [rad]";
    plot.y_label = "error [mm]";
    plot.series = {
        svg::Polyline{means, svg::palette(0), 2.0, "mean"},
        svg::Polyline{p95s, svg::palette(1), 1.5, "p95 of |total|"},
    };
    out.plots.emplace_back("monte_carlo.svg", std::move(plot));
  }
  return out;
}

// --------------------------------------------------------------------------
// sensitivity
// --------------------------------------------------------------------------

CommandResult run_sensitivity(const ProjectConfig& cfg) {
  CommandResult out;
  const std::vector<double> thetas{cfg.run.theta_ref};
  const double ideal_y =
      ideal_y_profile(cfg.peaucellier, cfg.run.reference_crank_angle, thetas)[0];
  const error_model::SensitivityResult res =
      error_model::sensitivity(cfg.error_params, cfg.distributions, cfg.run.theta_ref,
                               ideal_y);

  const std::array<const char*, 3> names{"delta_l", "c", "mu"};
  const std::array<double, 3> sigmas{cfg.distributions.delta_len.std,
                                     cfg.distributions.clearance.std,
                                     cfg.distributions.friction_mu.std};
  std::array<int, 3> rank{};
  for (int pos = 0; pos < 3; ++pos) {
    rank[static_cast<std::size_t>(res.ranking[static_cast<std::size_t>(pos)])] = pos + 1;
  }

  CsvBuilder csv({"param", "abs_partial", "sigma", "coefficient", "rank"});
  for (std::size_t i = 0; i < 3; ++i) {
    csv.row({names[i], num(res.abs_partials[i]), num(sigmas[i]),
             num(res.coefficients[i]), std::to_string(rank[i])});
  }
  out.files.emplace_back("sensitivity.csv", csv.str());

  ordered_json ranking = ordered_json::array();
  for (const auto r : res.ranking) {
    ranking.push_back(names[static_cast<std::size_t>(r)]);
  }
  out.results = ordered_json{
      {"theta_ref_rad", cfg.run.theta_ref},
      {"ideal_y_mm", ideal_y},
      {"coefficients",
       {{"delta_l", res.coefficients[0]},
        {"c", res.coefficients[1]},
        {"mu", res.coefficients[2]}}},
      {"ranking", ranking},
      {"hardware_reference", hardware_reference()},
  };

  if (cfg.run.svg) {
    svg::SvgPlot plot;
    plot.title = "Normalized sensitivity coefficients";
    plot.x_label = "parameter index (delta_l, c, mu)";
    plot.y_label = "coefficient";
    for (std::size_t i = 0; i < 3; ++i) {
      svg::Polyline bar;
      bar.points = {{static_cast<double>(i), 0.0},
                    {static_cast<double>(i), res.coefficients[i]}};
      bar.color = svg::palette(i);
      bar.stroke_width = 10.0;
      bar.label = names[i];
      plot.series.push_back(std::move(bar));
    }
    out.plots.emplace_back("sensitivity.svg", std::move(plot));
  }
  return out;
}

// --------------------------------------------------------------------------
// grasp
// --------------------------------------------------------------------------

CommandResult run_grasp_cmd(const ProjectConfig& cfg) {
  CommandResult out;
  std::vector<grasp::GripperState> history;
  const grasp::GraspResult res = grasp::run_grasp(cfg.gripper, cfg.run.scenario, &history);

  CsvBuilder csv({"step", "phi_rad", "mode", "contact_count", "fingertip_gap_mm"});
  for (std::size_t i = 0; i < history.size(); ++i) {
    const grasp::GripperState& s = history[i];
    const double gap = geom::distance(s.fingers[0].fingertip.position,
                                      s.fingers[1].fingertip.position);
    csv.row({std::to_string(i), num(s.drive), grasp::to_string(s.mode),
             std::to_string(s.contacts.size()), num(gap)});
  }
  out.files.emplace_back("grasp.csv", csv.str());

  ordered_json contacts = ordered_json::array();
  for (const auto& c : res.final_state.contacts) {
    contacts.push_back(ordered_json{{"finger", c.finger},
                                    {"phalange", grasp::to_string(c.phalange)},
                                    {"position", {c.position.x, c.position.y}},
                                    {"penetration_mm", c.penetration}});
  }
  ordered_json fingers = ordered_json::array();
  for (const auto& fin : res.final_state.fingers) {
    fingers.push_back(ordered_json{
        {"cam_angle_rad", fin.cam_angle},
        {"translation_rad", fin.translation_angle},
        {"psi_rad", fin.psi},
        {"tilt_rad", fin.tilt},
        {"first_contact_drive_rad",
         fin.first_contact_drive ? ordered_json(*fin.first_contact_drive)
                                 : ordered_json(nullptr)},
    });
  }
  out.results = ordered_json{
      {"classification", grasp::to_string(res.classification)},
      {"mode", grasp::to_string(res.mode)},
      {"contact_count", res.contact_count},
      {"object_displacement_mm", res.object_displacement},
      {"steps", res.steps},
      {"final_drive_rad", res.final_state.drive},
      {"fingers", fingers},
      {"contacts", contacts},
  };

  if (cfg.run.svg) {
    svg::SvgPlot plot;
    plot.title = "Grasp outcome";
    plot.x_label = "x [mm]";
    plot.y_label = "y [mm]";
    // Object outline.
    svg::Polyline outline;
    outline.color = svg::palette(3);
    outline.label = "object";
    const grasp::ObjectProfile& obj = cfg.run.scenario.object;
    if (obj.shape == grasp::ObjectProfile::Shape::circle) {
      for (int k = 0; k <= 64; ++k) {
        const double a = 2.0 * M_PI * k / 64.0;
        outline.points.push_back(obj.center +
                                 obj.radius * geom::Vec2{std::cos(a), std::sin(a)});
      }
    } else {
      outline.points = obj.vertices;
      outline.points.push_back(obj.vertices.front());
    }
    plot.series.push_back(std::move(outline));
    // Final finger columns.
    for (int f = 0; f < 2; ++f) {
      const auto& fin = res.final_state.fingers[static_cast<std::size_t>(f)];
      svg::Polyline finger;
      finger.color = svg::palette(static_cast<std::size_t>(f));
      finger.label = f == 0 ? "left finger" : "right finger";
      finger.stroke_width = 2.5;
      finger.points = {fin.segments[0].first, fin.segments[0].second,
                       fin.segments[1].second};
      plot.series.push_back(std::move(finger));
    }
    // Fingertip closure path.
    svg::Polyline path;
    path.color = svg::palette(4);
    path.label = "fingertip path";
    for (const auto& s : history) path.points.push_back(s.fingers[0].fingertip.position);
    plot.series.push_back(std::move(path));
    out.plots.emplace_back("grasp.svg", std::move(plot));
  }
  return out;
}

// --------------------------------------------------------------------------
// decompose
// --------------------------------------------------------------------------

CommandResult run_decompose(const ProjectConfig& cfg) {
  CommandResult out;
  const std::size_t n = cfg.run.grid == 0 ? 512u : cfg.run.grid;

  // Uniform grid over a full period of the doubled-angle term; the length
  // error term is excluded here (spectral separation targets the periodic
  // component), so ideal_y = 0 for the geo trace.
  error_model::DecompositionInput input;
  input.hysteresis = cfg.hysteresis;
  input.thetas.resize(n);
  input.geo.resize(n);
  input.friction.resize(n);
  input.clearance.resize(n);
  input.random.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double theta = 2.0 * M_PI * static_cast<double>(i) / static_cast<double>(n);
    input.thetas[i] = theta;
    input.geo[i] = error_model::geo_error(theta, cfg.error_params.link_len,
                                          cfg.error_params.delta_len, 0.0);
    input.friction[i] = error_model::friction_error(theta);
    input.clearance[i] = error_model::clearance_error(cfg.error_params.clearance, theta);
    input.random[i] =
        cfg.error_params.noise_amp * rng::standard_normal(cfg.run.seed, 1000000 + i, 0);
  }
  const std::size_t n_draws = cfg.run.samples == 0 ? 4096u : cfg.run.samples;
  input.clearance_samples.resize(n_draws);
  for (std::size_t k = 0; k < n_draws; ++k) {
    double c = cfg.distributions.clearance.mean +
               cfg.distributions.clearance.std *
                   rng::standard_normal(cfg.run.seed, 2000000, k);
    if (c < 0.0) c = 0.0;
    input.clearance_samples[k] = error_model::clearance_error(c, cfg.run.theta_max);
  }

  const error_model::DecompositionReport rep = error_model::decompose(input);

  CsvBuilder csv({"theta_rad", "geo_mm", "friction_mm", "clearance_mm", "random_mm"});
  for (std::size_t i = 0; i < n; ++i) {
    csv.row({num(input.thetas[i]), num(input.geo[i]), num(input.friction[i]),
             num(input.clearance[i]), num(input.random[i])});
  }
  out.files.emplace_back("decompose.csv", csv.str());

  out.results = ordered_json{
      {"geo_dominant_freq_cycles_per_rad", rep.geo_dominant_freq},
      {"geo_amplitude_mm", rep.geo_amplitude},
      {"clearance_skewness", rep.clearance_skewness},
      {"friction_band_mm", rep.friction_band},
      {"clearance_draws", n_draws},
      {"grid_points", n},
      {"hardware_reference", hardware_reference()},
  };

  if (cfg.run.svg) {
    svg::SvgPlot plot;
    plot.title = "Error component traces";
    plot.x_label = "theta [rad]";
    plot.y_label = "error [mm]";
    const auto series_of = [&](const std::vector<double>& ys, std::size_t color,
                               const char* label) {
      svg::Polyline pl;
      pl.color = svg::palette(color);
      pl.label = label;
      for (std::size_t i = 0; i < n; ++i) pl.points.push_back({input.thetas[i], ys[i]});
      return pl;
    };
    plot.series = {series_of(input.geo, 0, "geo"),
                   series_of(input.friction, 1, "friction"),
                   series_of(input.clearance, 2, "clearance"),
                   series_of(input.random, 3, "random")};
    out.plots.emplace_back("decompose.svg", std::move(plot));
  }
  return out;
}

}  // namespace

std::vector<double> ideal_y_profile(const linkage::PeaucellierSpec& spec,
                                    double alpha_ref,
                                    const std::vector<double>& thetas) {
  std::vector<double> out(thetas.size());
  const double base = line_coordinate(spec, alpha_ref);
  for (std::size_t i = 0; i < thetas.size(); ++i) {
    out[i] = line_coordinate(spec, alpha_ref + thetas[i]) - base;
  }
  return out;
}

unsigned thread_cap() {
  const char* env = std::getenv("SPD_THREADS");
  if (env == nullptr || *env == '\0') {
    return std::max(1u, std::thread::hardware_concurrency());
  }
  char* end = nullptr;
  const unsigned long v = std::strtoul(env, &end, 10);
  if (end == env || *end != '\0') {
    throw ConfigError("SPD_THREADS must be a nonnegative integer");
  }
  if (v == 0) return std::max(1u, std::thread::hardware_concurrency());
  return static_cast<unsigned>(std::min<unsigned long>(v, 256));
}

RunOutputs execute(const ProjectConfig& cfg) {
  CommandResult result;
  switch (cfg.run.command) {
    case Command::trajectory: result = run_trajectory(cfg); break;
    case Command::error_sweep: result = run_error_sweep(cfg); break;
    case Command::monte_carlo: result = run_monte_carlo(cfg); break;
    case Command::sensitivity: result = run_sensitivity(cfg); break;
    case Command::grasp_cmd: result = run_grasp_cmd(cfg); break;
    case Command::decompose: result = run_decompose(cfg); break;
  }

  RunOutputs out;
  for (const auto& [name, content] : result.files) {
    const std::string path = out_path(cfg, name);
    write_atomic(path, content);
    out.files.push_back(path);
  }
  for (const auto& [name, plot] : result.plots) {
    const std::string path = out_path(cfg, name);
    svg::emit_svg(plot, path);
    out.files.push_back(path);
  }

  ordered_json summary;
  summary["command"] = to_string(cfg.run.command);
  summary["version"] = kVersion;
  summary["seed"] = cfg.run.seed;
  summary["inputs"] = config_to_json(cfg);
  summary["results"] = result.results;
  ordered_json files = ordered_json::array();
  for (const auto& f : out.files) {
    files.push_back(std::filesystem::path(f).filename().string());
  }
  const std::string summary_path = out_path(cfg, "summary.json");
  files.push_back("summary.json");
  summary["files"] = files;

  write_atomic(summary_path, summary.dump(2) + "\n");
  out.files.push_back(summary_path);
  out.summary = std::move(summary);
  return out;
}

}  // namespace spd::io

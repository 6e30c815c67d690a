#ifndef SPD_CONFIG_HPP
#define SPD_CONFIG_HPP

#include <cstdint>
#include <string>

#include <json.hpp>

#include "spd/error_model.hpp"
#include "spd/grasp.hpp"
#include "spd/linkage.hpp"

namespace spd::io {

enum class Command {
  trajectory,
  error_sweep,
  monte_carlo,
  sensitivity,
  grasp_cmd,
  decompose,
};

const char* to_string(Command c);
Command command_from_string(const std::string& name);  // throws ConfigError

/// Per-run options, filled from the "run" config section and CLI flags.
struct RunConfig {
  Command command = Command::trajectory;
  std::string out_dir = "out";
  std::uint64_t seed = 0;
  bool svg = false;
  std::string mechanism = "peaucellier";  // trajectory target: peaucellier | sp
  std::size_t steps = 0;                  // 0 = per-command default
  std::size_t samples = 0;                // 0 = per-command default
  std::size_t grid = 0;                   // decompose grid, 0 = default
  double theta_max = 0.2094;              // rad
  double theta_ref = 0.17453;             // rad, sensitivity evaluation point
  double reference_crank_angle = 2.1;     // rad, linkage binding for ideal_y
  grasp::GraspScenario scenario{grasp::ObjectProfile::make_circle({0.0, 10.0}, 10.0),
                                40.0};
};

/// Full resolved configuration: mechanism specs, tolerance model and run
/// options. Defaults reproduce the documented reference setup.
struct ProjectConfig {
  linkage::PeaucellierSpec peaucellier{};
  linkage::SpLinkageSpec sp{};
  grasp::GripperSpec gripper{};
  error_model::ErrorParams error_params{};
  error_model::HysteresisParams hysteresis{};
  error_model::ParamDistributions distributions{};
  RunConfig run{};
};

ProjectConfig default_config();

/// Parses a config document in strict mode: unknown keys and out-of-range
/// values are ConfigErrors with path-qualified messages.
ProjectConfig parse_config(const std::string& json_text);

/// Loads and parses a config file. Missing file -> ConfigError.
ProjectConfig load_config(const std::string& path);

/// Serializes the resolved configuration (round-trips through parse_config).
nlohmann::ordered_json config_to_json(const ProjectConfig& cfg);

}  // namespace spd::io

#endif  // SPD_CONFIG_HPP

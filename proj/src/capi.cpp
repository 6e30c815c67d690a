#include "spd.h"

#include <cmath>
#include <new>
#include <string>
#include <vector>

#include "spd/config.hpp"
#include "spd/errors.hpp"
#include "spd/run.hpp"
#include "spd/version.hpp"

struct spd_run {
  spd::io::ProjectConfig config = spd::io::default_config();
  std::string error;
  std::string summary;
  std::vector<std::string> outputs;
};

namespace {

spd_status classify(const std::exception& e, spd_run* run) {
  run->error = e.what();
  if (dynamic_cast<const spd::ConfigError*>(&e) != nullptr) return SPD_ERR_CONFIG;
  if (dynamic_cast<const spd::KinematicsError*>(&e) != nullptr) return SPD_ERR_KINEMATICS;
  if (dynamic_cast<const spd::SimulationError*>(&e) != nullptr) return SPD_ERR_SIMULATION;
  if (dynamic_cast<const spd::IoError*>(&e) != nullptr) return SPD_ERR_IO;
  return SPD_ERR_INTERNAL;
}

template <typename Fn>
spd_status guarded(spd_run* run, Fn&& fn) {
  if (run == nullptr) return SPD_ERR_INTERNAL;
  run->error.clear();
  try {
    fn();
    return SPD_OK;
  } catch (const std::exception& e) {
    return classify(e, run);
  } catch (...) {
    run->error = "unknown error";
    return SPD_ERR_INTERNAL;
  }
}

}  // namespace

extern "C" {

const char* spd_version(void) { return spd::kVersion; }

spd_run* spd_run_new(void) { return new (std::nothrow) spd_run(); }

void spd_run_free(spd_run* run) { delete run; }

spd_status spd_run_load_config(spd_run* run, const char* path) {
  return guarded(run, [&] {
    if (path == nullptr) throw spd::ConfigError("config path is null");
    run->config = spd::io::load_config(path);
  });
}

spd_status spd_run_set_command(spd_run* run, const char* command) {
  return guarded(run, [&] {
    if (command == nullptr) throw spd::ConfigError("command is null");
    run->config.run.command = spd::io::command_from_string(command);
  });
}

spd_status spd_run_set_out_dir(spd_run* run, const char* dir) {
  return guarded(run, [&] {
    if (dir == nullptr || *dir == '\0') throw spd::ConfigError("output directory is empty");
    run->config.run.out_dir = dir;
  });
}

spd_status spd_run_set_seed(spd_run* run, uint64_t seed) {
  return guarded(run, [&] {
    run->config.run.seed = seed;
    run->config.error_params.seed = seed;
  });
}

spd_status spd_run_set_svg(spd_run* run, int enabled) {
  return guarded(run, [&] { run->config.run.svg = enabled != 0; });
}

spd_status spd_run_set_steps(spd_run* run, uint64_t steps) {
  return guarded(run, [&] { run->config.run.steps = static_cast<std::size_t>(steps); });
}

spd_status spd_run_set_samples(spd_run* run, uint64_t samples) {
  return guarded(run,
                 [&] { run->config.run.samples = static_cast<std::size_t>(samples); });
}

spd_status spd_run_set_theta_max(spd_run* run, double value, int degrees) {
  return guarded(run, [&] {
    const double rad = degrees != 0 ? value * M_PI / 180.0 : value;
    if (!(rad > 0.0)) throw spd::ConfigError("theta-max must be positive");
    run->config.run.theta_max = rad;
  });
}

spd_status spd_run_execute(spd_run* run) {
  return guarded(run, [&] {
    const spd::io::RunOutputs out = spd::io::execute(run->config);
    run->summary = out.summary.dump(2);
    run->outputs = out.files;
  });
}

const char* spd_run_error(const spd_run* run) {
  return run == nullptr ? "" : run->error.c_str();
}

const char* spd_run_summary_json(const spd_run* run) {
  return run == nullptr ? "" : run->summary.c_str();
}

uint64_t spd_run_output_count(const spd_run* run) {
  return run == nullptr ? 0 : run->outputs.size();
}

const char* spd_run_output_path(const spd_run* run, uint64_t index) {
  if (run == nullptr || index >= run->outputs.size()) return "";
  return run->outputs[static_cast<std::size_t>(index)].c_str();
}

}  // extern "C"

// spd - command line front end for the spd analysis library.
//
// Built against the C API only (spd.h); exit codes mirror spd_status:
// 2 config, 3 kinematics, 4 simulation, 5 I/O.

#include <cstdint>
#include <cstdio>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "spd.h"

namespace {

struct Options {
  std::string config_path;
  std::string out_dir;
  bool out_dir_set = false;
  std::uint64_t seed = 0;
  bool seed_set = false;
  bool svg = false;
  bool degrees = false;
  std::uint64_t steps = 0;
  bool steps_set = false;
  std::uint64_t samples = 0;
  bool samples_set = false;
  double theta_max = 0.0;
  bool theta_max_set = false;
};

void add_common_options(CLI::App* cmd, Options& opt) {
  cmd->add_option("--config", opt.config_path, "JSON config file");
  cmd->add_option("--out", opt.out_dir, "output directory")
      ->each([&](const std::string&) { opt.out_dir_set = true; });
  cmd->add_option("--seed", opt.seed, "random seed (default 0)")
      ->each([&](const std::string&) { opt.seed_set = true; });
  cmd->add_flag("--svg", opt.svg, "also emit SVG plots");
  cmd->add_flag("--deg", opt.degrees, "interpret angle flags as degrees");
  cmd->add_option("--steps", opt.steps, "sweep steps")
      ->each([&](const std::string&) { opt.steps_set = true; });
  cmd->add_option("--samples", opt.samples, "Monte Carlo samples")
      ->each([&](const std::string&) { opt.samples_set = true; });
  cmd->add_option("--theta-max", opt.theta_max, "sweep upper angle")
      ->each([&](const std::string&) { opt.theta_max_set = true; });
}

int fail(const spd_run* run, spd_status status) {
  std::fprintf(stderr, "spd: error: %s\n", spd_run_error(run));
  return static_cast<int>(status);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"planar straight-line linkage and adaptive gripper analysis"};
  app.set_version_flag("--version", std::string(spd_version()));
  app.require_subcommand(1);

  const std::vector<std::string> commands{"trajectory", "error-sweep", "monte-carlo",
                                          "sensitivity", "grasp", "decompose"};
  const std::vector<std::string> descriptions{
      "sweep a mechanism and dump node paths",
      "deterministic error components over the stroke",
      "Monte Carlo tolerance propagation",
      "Jacobian sensitivity ranking of the tolerance parameters",
      "quasi-static two-finger grasp rollout",
      "spatiotemporal error-component separation"};

  Options opt;
  std::vector<CLI::App*> subs;
  for (std::size_t i = 0; i < commands.size(); ++i) {
    CLI::App* sub = app.add_subcommand(commands[i], descriptions[i]);
    add_common_options(sub, opt);
    subs.push_back(sub);
  }

  CLI11_PARSE(app, argc, argv);

  std::string command;
  for (std::size_t i = 0; i < subs.size(); ++i) {
    if (subs[i]->parsed()) command = commands[i];
  }

  std::unique_ptr<spd_run, decltype(&spd_run_free)> run(spd_run_new(), &spd_run_free);
  if (!run) {
    std::fprintf(stderr, "spd: error: out of memory\n");
    return static_cast<int>(SPD_ERR_INTERNAL);
  }

  spd_status st = SPD_OK;
  if (!opt.config_path.empty()) {
    st = spd_run_load_config(run.get(), opt.config_path.c_str());
    if (st != SPD_OK) return fail(run.get(), st);
  }
  st = spd_run_set_command(run.get(), command.c_str());
  if (st != SPD_OK) return fail(run.get(), st);
  if (opt.out_dir_set) {
    st = spd_run_set_out_dir(run.get(), opt.out_dir.c_str());
    if (st != SPD_OK) return fail(run.get(), st);
  }
  if (opt.seed_set) {
    st = spd_run_set_seed(run.get(), opt.seed);
    if (st != SPD_OK) return fail(run.get(), st);
  }
  if (opt.svg) {
    st = spd_run_set_svg(run.get(), 1);
    if (st != SPD_OK) return fail(run.get(), st);
  }
  if (opt.steps_set) {
    st = spd_run_set_steps(run.get(), opt.steps);
    if (st != SPD_OK) return fail(run.get(), st);
  }
  if (opt.samples_set) {
    st = spd_run_set_samples(run.get(), opt.samples);
    if (st != SPD_OK) return fail(run.get(), st);
  }
  if (opt.theta_max_set) {
    st = spd_run_set_theta_max(run.get(), opt.theta_max, opt.degrees ? 1 : 0);
    if (st != SPD_OK) return fail(run.get(), st);
  }

  st = spd_run_execute(run.get());
  if (st != SPD_OK) return fail(run.get(), st);

  const std::uint64_t count = spd_run_output_count(run.get());
  for (std::uint64_t i = 0; i < count; ++i) {
    std::printf("%s\n", spd_run_output_path(run.get(), i));
  }
  return 0;
}

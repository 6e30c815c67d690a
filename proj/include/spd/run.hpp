#ifndef SPD_RUN_HPP
#define SPD_RUN_HPP

#include <string>
#include <vector>

#include <json.hpp>

#include "spd/config.hpp"

namespace spd::io {

struct RunOutputs {
  std::vector<std::string> files;        // paths written, in order
  nlohmann::ordered_json summary;        // also written as summary.json
};

/// Executes the configured command and writes its CSV / JSON / optional SVG
/// outputs under cfg.run.out_dir. Every output byte is a pure function of the
/// resolved config and seed; SPD_THREADS only changes the wall time.
RunOutputs execute(const ProjectConfig& cfg);

/// Internal parallelism cap from SPD_THREADS (0 or unset = auto).
unsigned thread_cap();

/// Ideal fingertip displacement along the inversor output line, at crank
/// offsets `thetas` past `alpha_ref`. This is the ideal_y binding used by the
/// error-model commands.
std::vector<double> ideal_y_profile(const linkage::PeaucellierSpec& spec,
                                    double alpha_ref, const std::vector<double>& thetas);

}  // namespace spd::io

#endif  // SPD_RUN_HPP

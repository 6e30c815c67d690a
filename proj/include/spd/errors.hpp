#ifndef SPD_ERRORS_HPP
#define SPD_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace spd {

// Base class for all library errors. The concrete subclass decides the
// process exit code at the CLI boundary (see spd.h status codes).
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Bad configuration file, schema violation, out-of-range input. Exit code 2.
class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& msg) : Error(msg) {}
};

// Geometry or mechanism analysis failure (singularities, unassemblable
// closures, degenerate inputs). Exit code 3.
class KinematicsError : public Error {
 public:
  explicit KinematicsError(const std::string& msg) : Error(msg) {}
};

// Grasp simulation failure (invalid steps, unresolvable contact). Exit code 4.
class SimulationError : public Error {
 public:
  explicit SimulationError(const std::string& msg) : Error(msg) {}
};

// Filesystem and output-writing failure. Exit code 5.
class IoError : public Error {
 public:
  explicit IoError(const std::string& msg) : Error(msg) {}
};

}  // namespace spd

#endif  // SPD_ERRORS_HPP

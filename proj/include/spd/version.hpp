#ifndef SPD_VERSION_HPP
#define SPD_VERSION_HPP

namespace spd {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace spd

#endif  // SPD_VERSION_HPP

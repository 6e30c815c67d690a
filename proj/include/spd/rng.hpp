#ifndef SPD_RNG_HPP
#define SPD_RNG_HPP

#include <cstdint>

namespace spd::rng {

// Counter-based random streams: every value is a pure function of
// (seed, stream, counter), so results are independent of evaluation order,
// thread scheduling and batch size. Mixing uses the splitmix64 finalizer,
// which avalanches well enough for Monte Carlo work.

std::uint64_t mix64(std::uint64_t z);

/// 64 random bits for the given key. `lane` selects independent words at the
/// same counter (Box-Muller needs two uniforms per normal draw).
std::uint64_t random_word(std::uint64_t seed, std::uint64_t stream,
                          std::uint64_t counter, std::uint64_t lane);

/// Uniform double strictly inside (0, 1).
double uniform01(std::uint64_t seed, std::uint64_t stream, std::uint64_t counter,
                 std::uint64_t lane);

/// Standard-normal draw addressed by (seed, stream, counter).
double standard_normal(std::uint64_t seed, std::uint64_t stream,
                       std::uint64_t counter);

/// Sequential view over one stream; each next() consumes one counter slot.
struct NormalStream {
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;
  std::uint64_t counter = 0;

  double next() { return standard_normal(seed, stream, counter++); }
};

}  // namespace spd::rng

#endif  // SPD_RNG_HPP

#include "spd/rng.hpp"

#include <cmath>

namespace spd::rng {

namespace {
constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;
}

std::uint64_t mix64(std::uint64_t z) {
  z += kGolden;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::uint64_t random_word(std::uint64_t seed, std::uint64_t stream,
                          std::uint64_t counter, std::uint64_t lane) {
  std::uint64_t h = mix64(seed);
  h = mix64(h ^ mix64(stream));
  h = mix64(h ^ mix64(counter));
  h = mix64(h ^ (lane * kGolden));
  return h;
}

double uniform01(std::uint64_t seed, std::uint64_t stream, std::uint64_t counter,
                 std::uint64_t lane) {
  const std::uint64_t w = random_word(seed, stream, counter, lane);
  // 53 random bits, offset by half an ulp so the result stays in (0, 1).
  return (static_cast<double>(w >> 11) + 0.5) * 0x1.0p-53;
}

double standard_normal(std::uint64_t seed, std::uint64_t stream,
                       std::uint64_t counter) {
  const double u1 = uniform01(seed, stream, counter, 0);
  const double u2 = uniform01(seed, stream, counter, 1);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

}  // namespace spd::rng

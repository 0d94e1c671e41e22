#pragma once

#include <cmath>
#include <cstdint>

namespace egopush {

inline std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9E3779B97F4A7C15ull;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

// Deterministic RNG built on splitmix64. Distribution sampling is
// hand-rolled (no std::*_distribution) so streams are bit-identical across
// compilers and standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() { return splitmix64(state_); }

  // [0, 1)
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Box-Muller, one value per call.
  double normal() {
    double u1 = 1.0 - uniform();  // (0, 1], keeps log() finite
    double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(6.283185307179586476925287 * u2);
  }

  // [0, n)
  int uniform_int(int n) {
    return static_cast<int>(next_u64() % static_cast<std::uint64_t>(n));
  }

 private:
  std::uint64_t state_;
};

// Splittable per-(env, episode) stream seed. Episode k of env i depends only
// on (base, i, k), never on how many envs stepped in between.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t env_index,
                                 std::uint64_t episode_index) {
  std::uint64_t s = base;
  std::uint64_t a = splitmix64(s);
  s = a ^ (0x9E3779B97F4A7C15ull * (env_index + 1));
  std::uint64_t b = splitmix64(s);
  s = b ^ (0xD1B54A32D192ED03ull * (episode_index + 1));
  return splitmix64(s);
}

}  // namespace egopush

#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace resilisim {

using Engine = std::mt19937_64;

/// Independent random streams are keyed by (master seed, purpose, index).
/// Each consumer in the pipeline owns one purpose tag so that, for example,
/// changing the fragility model never perturbs the storms that get sampled.
enum class StreamPurpose : std::uint64_t {
  Testbed = 1,
  Storm = 2,
  Failures = 3,
  Repairs = 4,
  Genetic = 5,
  Replay = 6,
};

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t master, StreamPurpose purpose,
                                 std::uint64_t index) {
  std::uint64_t h = splitmix64(master);
  h = splitmix64(h ^ static_cast<std::uint64_t>(purpose));
  return splitmix64(h ^ index);
}

inline Engine make_engine(std::uint64_t seed) { return Engine{seed}; }

inline Engine make_engine(std::uint64_t master, StreamPurpose purpose,
                          std::uint64_t index) {
  return Engine{derive_seed(master, purpose, index)};
}

/// Uniform double in [0, 1) built from the top 53 bits.
inline double uniform01(Engine& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// Uniform integer in [lo, hi] (inclusive), rejection sampled.
inline std::int64_t uniform_int(Engine& rng, std::int64_t lo, std::int64_t hi) {
  const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
  if (span == 0) return static_cast<std::int64_t>(rng());
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % span;
  std::uint64_t r;
  do {
    r = rng();
  } while (r >= limit);
  return lo + static_cast<std::int64_t>(r % span);
}

inline bool bernoulli(Engine& rng, double p) { return uniform01(rng) < p; }

}  // namespace resilisim

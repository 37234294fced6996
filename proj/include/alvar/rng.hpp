#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace alvar {

/// Seeded random stream with a fixed draw contract.
///
/// Every variate is built from raw 64-bit words of a Mersenne Twister, so the
/// sequence of values depends only on the seed and on the order of calls:
///   - uniform() consumes exactly one word and returns a value in [0, 1);
///   - normal() consumes exactly two uniforms (Box-Muller, no caching).
/// The standard library distributions are avoided on purpose because their
/// output is implementation-defined.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : engine_(seed) {}

  /// Independent stream derived from a master seed and a stream id.
  static Rng stream(std::uint64_t master_seed, std::uint64_t stream_id) {
    std::seed_seq seq{static_cast<std::uint32_t>(master_seed),
                      static_cast<std::uint32_t>(master_seed >> 32),
                      static_cast<std::uint32_t>(stream_id),
                      static_cast<std::uint32_t>(stream_id >> 32),
                      0x9e3779b9u};
    Rng rng;
    rng.engine_.seed(seq);
    return rng;
  }

  std::uint64_t next() { return engine_(); }

  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double normal() {
    const double u1 = 1.0 - uniform();  // (0, 1]
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

  double normal(double mean, double sd) { return mean + sd * normal(); }

 private:
  std::mt19937_64 engine_;
};

/// Stream tags used by the harness when splitting a master seed.
enum class StreamTag : std::uint64_t {
  observations = 1,
  replicate = 2,
  reference = 3,
  mse = 4,
};

inline Rng replicate_stream(std::uint64_t master_seed, StreamTag tag, std::uint64_t index) {
  return Rng::stream(master_seed, (static_cast<std::uint64_t>(tag) << 40) ^ index);
}

}  // namespace alvar

#ifndef SQZ_RNG_HPP_
#define SQZ_RNG_HPP_

#include <cstdint>
#include <random>

// Seeded random streams for the simulator. std::normal_distribution is
// implementation-defined, so Gaussian deviates are produced here with the
// polar method on top of the standardized mt19937_64 bit stream; a fixed
// (config, seed) pair then yields the same campaign on every libm that
// rounds sqrt/log identically.

namespace sqz {

class Random {
 public:
  explicit Random(std::uint64_t seed) : engine_(seed) {}

  // Uniform double in [0, 1) from the top 53 bits.
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  // Standard normal deviate (Marsaglia polar method).
  double gaussian() {
    if (has_cached_) {
      has_cached_ = false;
      return cached_;
    }
    double u, v, s;
    do {
      u = 2.0 * uniform() - 1.0;
      v = 2.0 * uniform() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double scale = std::sqrt(-2.0 * std::log(s) / s);
    cached_ = v * scale;
    has_cached_ = true;
    return u * scale;
  }

  std::uint64_t raw() { return engine_(); }

 private:
  std::mt19937_64 engine_;
  double cached_ = 0.0;
  bool has_cached_ = false;
};

// splitmix64 mix of a master seed and a stream id; used to derive
// independent substreams (one per MOT cycle, one for the drift walk).
inline std::uint64_t substream_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ull * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

}  // namespace sqz

#endif  // SQZ_RNG_HPP_

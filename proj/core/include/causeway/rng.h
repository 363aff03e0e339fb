#ifndef CAUSEWAY_RNG_H_
#define CAUSEWAY_RNG_H_

#include <cstdint>
#include <random>

namespace causeway {

// 64-bit Mersenne Twister; its output sequence is fixed by the standard, so
// seeded runs reproduce across platforms. Distributions are taken from
// Boost.Random (header-only, implementation-stable) rather than <random>.
using Rng = std::mt19937_64;

// Derives an independent seed for substream `stream` of `seed`.
std::uint64_t substream_seed(std::uint64_t seed, std::uint64_t stream);

inline Rng make_rng(std::uint64_t seed, std::uint64_t stream) {
  return Rng(substream_seed(seed, stream));
}

// Uniform double in [0, 1) with 53 random bits.
inline double uniform01(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Uniform integer in [0, n). Uses rejection so the result is unbiased and
// identical on every platform.
std::uint64_t uniform_index(Rng& rng, std::uint64_t n);

// Gamma(shape, 1) variate.
double gamma_variate(Rng& rng, double shape);

}  // namespace causeway

#endif  // CAUSEWAY_RNG_H_

#ifndef LOGNPCE_RNG_HPP
#define LOGNPCE_RNG_HPP

#include <cstdint>

namespace lognpce {

/// SplitMix64 finalizer; bijective on 64-bit words.
inline std::uint64_t splitmix64(std::uint64_t z) {
    z += 0x9E3779B97F4A7C15ull;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

/// Counter-based uniform in (0,1) keyed by (seed, sample index, coordinate).
/// Stateless, so any sample/coordinate pair can be generated independently of
/// evaluation order or parallel schedule.
inline double uniform_variate(std::uint64_t seed, std::uint64_t sample, std::uint64_t coord) {
    const std::uint64_t h = splitmix64(splitmix64(splitmix64(seed) ^ sample) ^ coord);
    return (static_cast<double>(h >> 11) + 0.5) * 0x1p-53;
}

/// Inverse of the standard normal CDF (Wichura's PPND16 rational
/// approximations, accurate to full double precision on (0,1)).
double inverse_normal_cdf(double p);

/// Standard Gaussian variate keyed by (seed, sample index, coordinate).
inline double gaussian_variate(std::uint64_t seed, std::uint64_t sample, std::uint64_t coord) {
    return inverse_normal_cdf(uniform_variate(seed, sample, coord));
}

} // namespace lognpce

#endif

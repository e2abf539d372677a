#pragma once

#include <array>
#include <cstdint>

namespace ilro {

/// Philox4x32-10 counter-based generator: a pure function from
/// (key, counter) to four 32-bit words. Streams keyed by independent tuples
/// never share state, so parallel sample evaluation is order-independent.
std::array<uint32_t, 4> philox4x32(const std::array<uint32_t, 4>& counter,
                                   const std::array<uint32_t, 2>& key);

/// Uniform double in (0, 1) from two 32-bit words (never returns 0 or 1).
double uniform_from_bits(uint32_t hi, uint32_t lo);

/// Inverse of the standard normal CDF (Wichura's AS241, double precision).
double inverse_normal_cdf(double p);

/// One standard normal draw for the keyed counter tuple.
double gaussian_draw(uint64_t seed, uint64_t sample_index, uint32_t stage,
                     uint32_t parameter);

}  // namespace ilro

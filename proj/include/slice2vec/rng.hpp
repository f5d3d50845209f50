#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <utility>

namespace s2v {

// Thin deterministic layer over std::mt19937_64. The standard distribution
// classes are implementation-defined, which would make trained models differ
// across standard libraries; these helpers pin the exact bit stream.

// Uniform double in [0, 1) using the top 53 bits of one draw.
inline double uniform01(std::mt19937_64& gen) {
    return static_cast<double>(gen() >> 11) * 0x1.0p-53;
}

inline double uniform_range(std::mt19937_64& gen, double lo, double hi) {
    return lo + (hi - lo) * uniform01(gen);
}

// One standard-normal sample via Box-Muller (two uniforms per pair; the
// second sample of each pair is discarded for simplicity).
inline double gaussian(std::mt19937_64& gen) {
    double u1 = 1.0 - uniform01(gen);  // (0, 1], keeps log() finite
    double u2 = uniform01(gen);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

}  // namespace s2v

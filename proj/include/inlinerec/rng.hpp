#pragma once

#include <cstdint>
#include <random>

namespace inlinerec {

// std::mt19937_64 has a fully specified output sequence; the conversion to
// [0,1) is done here rather than via std::uniform_real_distribution, whose
// algorithm varies between standard libraries.
inline double unit_double(std::mt19937_64& g) {
    return static_cast<double>(g() >> 11) * 0x1.0p-53;
}

// SplitMix64 finalizer: a stateless hash of (seed, position).
inline std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline double unit_double(std::uint64_t seed, std::uint64_t position) {
    return static_cast<double>(mix64(mix64(seed) ^ position) >> 11) * 0x1.0p-53;
}

} // namespace inlinerec

#pragma once

#include <cstdint>
#include <random>

namespace dpns {

/// Deterministic uniform sampling on top of mt19937_64; avoids
/// std::uniform_real_distribution, whose output is implementation-defined.
struct Rng {
    std::mt19937_64 gen;
    explicit Rng(std::uint64_t seed) : gen(seed) {}
    double uniform01() { return (gen() >> 11) * 0x1.0p-53; }
    double symmetric() { return 2.0 * uniform01() - 1.0; }
};

} // namespace dpns

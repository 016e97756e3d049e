#pragma once

#include <cstdint>
#include <random>

namespace nbodylab {

/// Deterministic random source. mt19937_64 is fully specified by the standard;
/// the double mappings below avoid std::uniform_real_distribution, whose output
/// sequence is implementation-defined and would break the byte-identical-output
/// contract across toolchains.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    /// Uniform in [0, 1) with 53 random bits.
    double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    std::uint64_t bits() { return engine_(); }

private:
    std::mt19937_64 engine_;
};

}  // namespace nbodylab

#pragma once

#include <cstdint>
#include <random>
#include <span>

namespace fluidrank {

/// Seeded generator with a portable uniform draw. std::mt19937_64's sequence is
/// fixed by the standard; the distribution adaptors are not, so they are
/// avoided.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    /// Uniform on [0, 1) with 53 bits of resolution.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    /// Index drawn with probability proportional to `weights`.
    std::size_t categorical(std::span<const double> weights);

    /// Box-Muller from two uniform draws.
    double normal(double mean, double sd);

    std::uint64_t next() { return engine_(); }

private:
    std::mt19937_64 engine_;
};

/// Independent child seed for stream `counter` of `master` (splitmix64).
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t counter);

} // namespace fluidrank

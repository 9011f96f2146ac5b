#pragma once

#include <cstdint>
#include <random>

namespace tbsim {

/// mt19937_64 stream keyed by (seed, stream index). Both the engine and
/// std::seed_seq are fully specified by the standard, so a given key yields
/// the same sequence on every conforming platform.
class Rng {
public:
    Rng(std::uint64_t seed, std::uint64_t stream)
    {
        std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                          static_cast<std::uint32_t>(stream),
                          static_cast<std::uint32_t>(stream >> 32), 0x7462u};
        engine_.seed(seq);
    }

    /// Uniform in the open interval (0, 1).
    double uniform() { return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53; }

    std::mt19937_64& engine() { return engine_; }

private:
    std::mt19937_64 engine_;
};

/// splitmix64 finalizer; derives independent run seeds from a base seed.
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index)
{
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ull * (index + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

}  // namespace tbsim

#pragma once

#include <cstdint>

namespace bufsim {

/// SplitMix64. Output depends only on the 64-bit state, so sequences are
/// bit-identical across platforms and compilers.
class Prng {
public:
    constexpr explicit Prng(std::uint64_t seed = 0) noexcept : state_(seed) {}

    constexpr std::uint64_t next_u64() noexcept
    {
        state_ += 0x9E3779B97F4A7C15ull;
        std::uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

    /// Uniform in [0, 1) from the top 53 bits.
    constexpr double next_unit() noexcept
    {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    constexpr std::uint64_t state() const noexcept { return state_; }

private:
    std::uint64_t state_;
};

/// Seed for an independent sub-stream: the `index`-th output (1-based) of a
/// generator seeded with `master`.
std::uint64_t derive_seed(std::uint64_t master, unsigned index) noexcept;

/// Mixes a salt into a master seed; distinct salts give unrelated seeds.
std::uint64_t mix_seed(std::uint64_t master, std::uint64_t salt) noexcept;

}  // namespace bufsim

#include "bufsim/prng.hpp"

namespace bufsim {

std::uint64_t derive_seed(std::uint64_t master, unsigned index) noexcept
{
    Prng p(master);
    std::uint64_t out = 0;
    for (unsigned i = 0; i < index; ++i) {
        out = p.next_u64();
    }
    return out;
}

std::uint64_t mix_seed(std::uint64_t master, std::uint64_t salt) noexcept
{
    // Hash the salt first so that nearby salts land far apart, then combine.
    const std::uint64_t h = Prng(salt).next_u64();
    return Prng(master ^ h).next_u64();
}

}  // namespace bufsim

/**
 * @file rng.hpp
 * @brief Seedable xoshiro256** generator with platform-independent helpers.
 *
 * std::uniform_real_distribution is implementation-defined, so anything that
 * must reproduce bit-identically across toolchains draws through this header.
 */
#ifndef MOSPH_RNG_HPP
#define MOSPH_RNG_HPP

#include <cstdint>
#include <vector>

namespace mosph
{

/// xoshiro256** by Blackman and Vigna, seeded through splitmix64.
class Xoshiro256
{
  public:
    explicit Xoshiro256(std::uint64_t seed) { reseed(seed); }

    void reseed(std::uint64_t seed)
    {
        std::uint64_t x = seed;
        for (auto &word : state_)
        {
            // splitmix64 step
            x += 0x9E3779B97F4A7C15ull;
            std::uint64_t z = x;
            z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
            z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
            word = z ^ (z >> 31);
        }
    }

    std::uint64_t next()
    {
        const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    /// Uniform double in [0, 1) with 53 random bits.
    double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    /// Uniform double in (-1, 1).
    double uniformPm1() { return 2.0 * uniform01() - 1.0; }

    /// Uniform double in [lo, hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    /// Uniform integer in [0, n). Unbiased by rejection.
    std::uint64_t below(std::uint64_t n)
    {
        const std::uint64_t threshold = (0 - n) % n;
        for (;;)
        {
            const std::uint64_t r = next();
            if (r >= threshold)
                return r % n;
        }
    }

  private:
    static std::uint64_t rotl(std::uint64_t v, int k) { return (v << k) | (v >> (64 - k)); }
    std::uint64_t state_[4];
};

/// Fisher-Yates shuffle driven by the project generator.
template <typename T>
void fisherYatesShuffle(std::vector<T> &items, Xoshiro256 &rng)
{
    for (std::size_t i = items.size(); i > 1; --i)
    {
        const std::size_t j = static_cast<std::size_t>(rng.below(i));
        std::swap(items[i - 1], items[j]);
    }
}

} // namespace mosph
#endif // MOSPH_RNG_HPP

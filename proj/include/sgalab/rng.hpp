#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>

namespace sgalab {

// SplitMix64 output function (Steele, Lea & Flood). Used to whiten seeds and to
// derive substream seeds; it is a bijection on 64-bit words.
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept
{
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

// Seed of substream `index` under `master`. Replica r of an experiment always
// runs on derive_seed(seed, r), whatever the thread that executes it.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) noexcept
{
    return splitmix64(splitmix64(master) ^ splitmix64(~index));
}

// Random stream: 64-bit Mersenne Twister (std::mt19937_64) seeded with the
// SplitMix64 image of a 64-bit seed. Satisfies UniformRandomBitGenerator so it
// plugs into <random> distributions.
class RandomStream {
public:
    using result_type = std::uint64_t;

    explicit RandomStream(std::uint64_t seed)
        : engine_(splitmix64(seed))
        , seed_(seed)
    {
    }

    static constexpr result_type min() noexcept { return std::mt19937_64::min(); }
    static constexpr result_type max() noexcept { return std::mt19937_64::max(); }
    result_type operator()() { return engine_(); }

    std::uint64_t seed() const noexcept { return seed_; }

    RandomStream substream(std::uint64_t index) const { return RandomStream(derive_seed(seed_, index)); }

    // Uniform on [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    bool bernoulli(double p) { return uniform() < p; }

    // Uniform on {0, ..., n-1}; rejection keeps it exactly uniform.
    std::uint64_t below(std::uint64_t n)
    {
        const std::uint64_t limit = max() - max() % n;
        std::uint64_t x;
        do {
            x = engine_();
        } while (x >= limit);
        return x % n;
    }

    // Number of failures before the first success of Bernoulli(p) trials, p in (0, 1).
    std::uint64_t geometric_failures(double p)
    {
        const double u = 1.0 - uniform(); // (0, 1]
        const double g = std::floor(std::log(u) / std::log1p(-p));
        if (!(g < 9.0e18)) {
            return std::numeric_limits<std::uint64_t>::max();
        }
        return static_cast<std::uint64_t>(g);
    }

    std::uint64_t poisson(double mean)
    {
        if (mean <= 0.0) {
            return 0;
        }
        std::poisson_distribution<std::uint64_t> d(mean);
        return d(engine_);
    }

    std::uint64_t binomial(std::uint64_t n, double p)
    {
        if (n == 0 || p <= 0.0) {
            return 0;
        }
        if (p >= 1.0) {
            return n;
        }
        std::binomial_distribution<std::uint64_t> d(n, p);
        return d(engine_);
    }

private:
    std::mt19937_64 engine_;
    std::uint64_t seed_;
};

} // namespace sgalab

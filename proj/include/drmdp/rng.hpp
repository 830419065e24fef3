#pragma once

#include <cstdint>
#include <random>
#include <span>

namespace drmdp {

/// Seeded pseudo-random stream. The engine is std::mt19937_64, whose output
/// sequence is fixed by the standard; doubles are formed from the top 53
/// bits so trajectories are identical on every platform.
class RngStream {
public:
    explicit RngStream(std::uint64_t seed = 0) : seed_(seed), engine_(seed) {}

    std::uint64_t seed() const noexcept { return seed_; }
    std::uint64_t next_u64() { return engine_(); }

    /// Uniform in [0, 1).
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    bool bernoulli(double p) { return uniform() < p; }

    /// Index drawn from unnormalized nonnegative weights.
    std::size_t categorical(std::span<const double> weights) {
        double total = 0.0;
        for (double w : weights) total += w;
        double u = uniform() * total;
        for (std::size_t i = 0; i < weights.size(); ++i) {
            if (u < weights[i]) return i;
            u -= weights[i];
        }
        // roundoff: fall back to the last positive weight
        for (std::size_t i = weights.size(); i-- > 0;)
            if (weights[i] > 0.0) return i;
        return 0;
    }

private:
    std::uint64_t seed_;
    std::mt19937_64 engine_;
};

/// splitmix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Seed for Monte-Carlo run `run` at sweep grid index `grid_index`:
/// base_seed XOR mix64(mix64(grid_index) XOR run). Depends only on the
/// (grid_index, run) cell, so extending a grid leaves existing streams alone.
constexpr std::uint64_t derive_seed(std::uint64_t base_seed, std::uint64_t grid_index,
                                    std::uint64_t run) noexcept {
    return base_seed ^ mix64(mix64(grid_index) ^ run);
}

} // namespace drmdp

#pragma once

#include <cstdint>
#include <random>

namespace pfou {

/// SplitMix64 finalizer; decorrelates nearby integer seeds.
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

/// Seed of replication r in a Monte Carlo run. Each replication owns its own
/// generator, so results do not depend on how replications are scheduled.
constexpr std::uint64_t replication_seed(std::uint64_t base_seed, std::uint64_t r) noexcept {
    return base_seed ^ r;
}

/// Standard-normal source. Not thread-safe; create one per task.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(splitmix64(seed)) {}

    double normal() { return normal_(engine_); }

    std::mt19937_64& engine() noexcept { return engine_; }

private:
    std::mt19937_64 engine_;
    std::normal_distribution<double> normal_{0.0, 1.0};
};

}  // namespace pfou

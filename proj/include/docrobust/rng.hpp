#pragma once

#include <cstdint>
#include <string_view>

namespace docrobust {

/// Counter-based generator: draw i is mix(seed + i * golden_gamma), where mix
/// is the SplitMix64 finalizer. The integer stream depends only on the seed
/// and the draw index, so it is identical on every platform. Real-valued
/// helpers are derived from the integer stream with fixed formulas.
class SeededRng {
public:
    explicit SeededRng(std::uint64_t seed = 0) noexcept : seed_(seed) {}

    std::uint64_t seed() const noexcept { return seed_; }
    std::uint64_t counter() const noexcept { return counter_; }

    std::uint64_t next_u64() noexcept;

    /// Uniform in [0, 1) with 53-bit resolution.
    double uniform() noexcept;
    double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }
    /// Uniform integer in [lo, hi] (inclusive).
    int uniform_int(int lo, int hi) noexcept;
    bool bernoulli(double p) noexcept { return uniform() < p; }
    /// Standard normal via Box-Muller (consumes two draws, no caching).
    double normal() noexcept;
    double normal(double mean, double stddev) noexcept { return mean + stddev * normal(); }
    double cauchy(double location, double scale) noexcept;

    static std::uint64_t mix(std::uint64_t z) noexcept;

private:
    std::uint64_t seed_;
    std::uint64_t counter_ = 0;
};

/// Stable 64-bit hash (FNV-1a then SplitMix64 finalizer) deriving an
/// independent stream per (base seed, image, perturbation, level).
std::uint64_t child_seed(std::uint64_t base_seed, std::string_view image_id, int perturbation, int level) noexcept;

/// FNV-1a 64 over raw bytes; exposed for fingerprints and tests.
std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t h = 0xcbf29ce484222325ULL) noexcept;

} // namespace docrobust

#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace destrike {

std::uint64_t splitmix64(std::uint64_t x) noexcept;

/// Derives a child seed from a parent seed and a string key (FNV-1a then
/// splitmix64 mixing). Used for per-image and per-partition seeding.
std::uint64_t derive_seed(std::uint64_t seed, std::string_view key) noexcept;
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) noexcept;

/// Seeded generator with platform-independent value mapping: the standard
/// distributions are implementation-defined, so sampling is done on raw
/// mt19937_64 output here.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next() { return engine_(); }
    /// Uniform in [0, 1).
    double uniform();
    /// Uniform in [lo, hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    /// Uniform integer in [lo, hi], inclusive.
    std::int64_t uniform_int(std::int64_t lo, std::int64_t hi);
    bool coin() { return (next() >> 63) != 0; }

private:
    std::mt19937_64 engine_;
};

}  // namespace destrike

#pragma once

#include <cstdint>
#include <random>

namespace qgrad {

/// Seeded RNG with hand-rolled uniform draws. std::mt19937_64 output is
/// specified by the standard, but the distribution adaptors are not, so the
/// draws below are written out to keep CSV output byte-identical across
/// toolchains.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform double in [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    /// Uniform integer in [0, bound) via rejection, bias-free.
    std::uint64_t uniform_below(std::uint64_t bound) {
        if (bound <= 1) return 0;
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
        std::uint64_t v;
        do { v = engine_(); } while (v >= limit);
        return v % bound;
    }

    /// Uniform integer in [lo, hi] inclusive.
    std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
        return lo + static_cast<std::int64_t>(
                        uniform_below(static_cast<std::uint64_t>(hi - lo + 1)));
    }

    bool coin() { return (engine_() >> 63) != 0; }

    /// Derives an independent child stream, e.g. one per repetition or column.
    Rng spawn(std::uint64_t stream_id) {
        return Rng(engine_() ^ (0x9e3779b97f4a7c15ULL * (stream_id + 1)));
    }

private:
    std::mt19937_64 engine_;
};

} // namespace qgrad

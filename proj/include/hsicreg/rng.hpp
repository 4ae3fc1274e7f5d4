#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace hsicreg {

/// SplitMix64 finalizer; used to derive independent stream keys.
[[nodiscard]] constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30U)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27U)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31U);
}

[[nodiscard]] constexpr std::uint64_t derive_key(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0,
                                                 std::uint64_t c = 0) noexcept {
    std::uint64_t k = mix64(seed);
    k = mix64(k ^ a);
    k = mix64(k ^ (b + 0x632be59bd9b4e019ULL));
    k = mix64(k ^ (c + 0x8cb92ba72f3d8dd7ULL));
    return k;
}

/// Random stream keyed by (seed, a, b, c). Two streams with different keys are
/// statistically independent, and a stream's output depends only on its key.
///
/// The distributions are implemented here rather than taken from <random>
/// because the standard leaves their algorithms unspecified; only the engine
/// output is pinned down across standard libraries.
class Stream {
public:
    explicit Stream(std::uint64_t seed, std::uint64_t a = 0, std::uint64_t b = 0, std::uint64_t c = 0)
        : engine_(derive_key(seed, a, b, c)) {}

    std::uint64_t next() { return engine_(); }

    /// Uniform on the open interval (0, 1), 53-bit resolution.
    double uniform() {
        return (static_cast<double>(engine_() >> 11U) + 0.5) * 0x1.0p-53;
    }

    /// Uniform integer in [0, bound); unbiased by rejection.
    std::uint64_t below(std::uint64_t bound) {
        const std::uint64_t threshold = (0 - bound) % bound;
        for (;;) {
            const std::uint64_t r = engine_();
            if (r >= threshold) return r % bound;
        }
    }

    /// Standard normal by Box-Muller; the paired variate is cached.
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        const double radius = std::sqrt(-2.0 * std::log(uniform()));
        const double angle = 2.0 * std::numbers::pi * uniform();
        spare_ = radius * std::sin(angle);
        has_spare_ = true;
        return radius * std::cos(angle);
    }

    bool bernoulli(double p) { return uniform() < p; }

private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace hsicreg

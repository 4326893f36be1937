#pragma once

// Counter-based random streams. Every (seed, domain, index...) tuple names an
// independent SplitMix64 stream, so draws do not depend on evaluation order
// or on how work is split across threads.

#include <cmath>
#include <complex>
#include <cstdint>
#include <initializer_list>
#include <numbers>
#include <utility>

namespace ikm {

namespace detail {
inline constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ull;

constexpr std::uint64_t splitmix_finalize(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}
} // namespace detail

/// Stream domains used by the library; distinct domains never share a stream.
enum class StreamDomain : std::uint64_t { illumination = 1, noise = 2, oracle = 3, test = 4 };

class CounterRng {
public:
    CounterRng(std::uint64_t seed, StreamDomain domain, std::initializer_list<std::uint64_t> path = {}) {
        std::uint64_t key = detail::splitmix_finalize(seed + detail::kGolden);
        key = detail::splitmix_finalize(key ^ (static_cast<std::uint64_t>(domain) * detail::kGolden));
        for (std::uint64_t p : path) key = detail::splitmix_finalize(key ^ ((p + 1) * detail::kGolden));
        key_ = key;
    }

    /// n-th output of the stream is a pure function of (key, n).
    std::uint64_t next_u64() {
        ++counter_;
        return detail::splitmix_finalize(key_ + counter_ * detail::kGolden);
    }

    /// Uniform in (0, 1].
    double uniform() { return (double(next_u64() >> 11) + 1.0) * 0x1.0p-53; }

    /// Standard normal pair via Box-Muller.
    std::pair<double, double> normal_pair() {
        const double u1 = uniform();
        const double u2 = uniform();
        const double rad = std::sqrt(-2.0 * std::log(u1));
        const double ang = 2.0 * std::numbers::pi * u2;
        return {rad * std::cos(ang), rad * std::sin(ang)};
    }

    /// Circularly-symmetric complex Gaussian with E|z|^2 = 1.
    std::complex<double> complex_normal() {
        const auto [a, b] = normal_pair();
        return {a * std::numbers::sqrt2 * 0.5, b * std::numbers::sqrt2 * 0.5};
    }

    std::uint64_t counter() const { return counter_; }

private:
    std::uint64_t key_ = 0;
    std::uint64_t counter_ = 0;
};

} // namespace ikm

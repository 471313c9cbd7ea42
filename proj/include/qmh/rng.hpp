#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string_view>
#include <vector>

namespace qmh {

/// splitmix64 finalizer; used to derive independent substream seeds from one
/// root seed so that a single number reproduces every random choice of a run.
inline std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Deterministic substream seed from a root seed, a textual stream tag and up
/// to two indices (chain id, shot id, ...).
inline std::uint64_t derive_seed(std::uint64_t root, std::string_view tag,
                                 std::uint64_t a = 0, std::uint64_t b = 0) {
    std::uint64_t h = mix64(root);
    for (char c : tag) {
        h = mix64(h ^ static_cast<std::uint64_t>(static_cast<unsigned char>(c)));
    }
    h = mix64(h ^ a);
    return mix64(h ^ b);
}

// mt19937_64 has a standard-mandated output sequence. Combined with the
// hand-rolled [0,1) conversion below (std::uniform_real_distribution is
// implementation-defined) every draw is reproducible across platforms.
using Rng = std::mt19937_64;

inline constexpr const char* kRngAlgorithm = "mt19937_64+splitmix64-streams";

inline Rng make_rng(std::uint64_t root, std::string_view tag,
                    std::uint64_t a = 0, std::uint64_t b = 0) {
    return Rng(derive_seed(root, tag, a, b));
}

/// Uniform double in [0,1) with 53 random bits.
inline double next_double(Rng& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// Uniform integer in [0, n), n >= 1. Multiply-shift (Lemire); the bias of
/// n/2^64 is far below anything observable at desk scale.
inline std::uint64_t next_below(Rng& rng, std::uint64_t n) {
    return static_cast<std::uint64_t>(
        (static_cast<unsigned __int128>(rng()) * n) >> 64);
}

/// Standard normal draw via Box-Muller on the portable uniform above.
inline double next_gaussian(Rng& rng) {
    double u1 = 0.0;
    do {
        u1 = next_double(rng);
    } while (u1 == 0.0);
    const double u2 = next_double(rng);
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * std::numbers::pi * u2);
}

/// Draws indices from a fixed probability table by inverse-CDF lookup.
/// Zero-probability entries are never returned.
class DiscreteSampler {
public:
    explicit DiscreteSampler(const std::vector<double>& probs) : cdf_(probs) {
        if (cdf_.empty()) {
            throw std::invalid_argument("DiscreteSampler: empty table");
        }
        double acc = 0.0;
        for (double& c : cdf_) {
            acc += c;
            c = acc;
        }
        total_ = acc;
        if (!(total_ > 0.0)) {
            throw std::invalid_argument("DiscreteSampler: zero total mass");
        }
    }

    std::size_t operator()(Rng& rng) const {
        const double u = next_double(rng) * total_;
        const auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
        return static_cast<std::size_t>(
            std::min<std::ptrdiff_t>(it - cdf_.begin(),
                                     static_cast<std::ptrdiff_t>(cdf_.size()) - 1));
    }

private:
    std::vector<double> cdf_;
    double total_ = 0.0;
};

} // namespace qmh

#pragma once

#include <cmath>
#include <cstdint>

namespace driftmle {

// Recorded in artifact metadata so outputs are attributable to the exact
// generator recipe.
inline constexpr const char* kRngAlgorithm = "splitmix64-counter+inverse-cdf-normal";

inline constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ull;

// SplitMix64 finalizer: a bijection with avalanche (one flipped input bit
// changes about half the output bits).
constexpr std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

// Per-replicate seeds. Inputs master + (i+1)*odd are pairwise distinct, and
// mix64 is injective, so distinct indices can never collide. The mixing also
// keeps the resulting stream states from sitting on one arithmetic
// progression, which is what the raw index would do.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t replicate_index) {
    return mix64(master + (replicate_index + 1) * kGolden);
}

// Inverse standard normal CDF (rational minimax approximation, |error|
// ~1e-15 over (0,1)). Strictly monotone; p must lie in (0,1).
double normal_quantile(double p);

inline double normal_cdf(double z) {
    return 0.5 * std::erfc(-z * 0.70710678118654752440);
}

// Counter stream: state walks an odd-constant progression and every output
// is the mixed counter, so draws are independent of call history and the
// stream can never collapse to a short cycle.
class NormalStream {
public:
    explicit NormalStream(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_word() {
        state_ += kGolden;
        return mix64(state_);
    }

    // strictly inside (0,1): (w + 1/2) * 2^-53 for w < 2^53
    double uniform() {
        return (static_cast<double>(next_word() >> 11) + 0.5) * 0x1p-53;
    }

    double normal() { return normal_quantile(uniform()); }

private:
    std::uint64_t state_;
};

}  // namespace driftmle

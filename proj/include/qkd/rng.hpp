#pragma once

#include <cstdint>
#include <random>

namespace qkd {

/// Deterministic random stream used by every stochastic stage.
///
/// All draws go through the helpers below (never through std::*_distribution),
/// so a given seed reproduces the identical event sequence on any platform.
class RandomStream {
public:
    explicit RandomStream(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform double in [0, 1), 53 significant bits.
    double next_double() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    int next_bit() { return static_cast<int>(engine_() & 1u); }

    /// Uniform index in [0, n); n must be a power of two.
    std::uint32_t next_index_pow2(std::uint32_t n) {
        return static_cast<std::uint32_t>(engine_() & (n - 1u));
    }

    bool bernoulli(double p) { return next_double() < p; }

private:
    std::mt19937_64 engine_;
};

/// Derives an independent substream seed from a master seed (splitmix64 step).
/// Parallel pulse batches take split_seed(master, batch_index) each.
std::uint64_t split_seed(std::uint64_t master, std::uint64_t stream_index);

}  // namespace qkd

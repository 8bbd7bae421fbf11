#pragma once

#include <cstdint>
#include <vector>

#include "qkd/rng.hpp"

namespace qkd {

enum class PulseClass : std::uint8_t { signal, decoy };
enum class Basis : std::uint8_t { rectilinear, diagonal };

/// One BB84 photon: all photons of a pulse leave Alice in the same state,
/// but the channel may substitute or disturb individual ones.
struct PhotonState {
    Basis basis;
    std::uint8_t bit;
};

struct SourceConfig {
    double mu = 0.1;              // signal mean photon number
    double mu_prime = 0.5;        // decoy mean photon number, != mu
    double signal_fraction = 0.5; // P(pulse is signal), i.i.d. per pulse
    unsigned n_max = 10;          // photon-number truncation, tail lumped at n_max

    void validate() const;
};

/// Phase randomization is already traced out: the emitted state is the Fock
/// mixture, so we sample photon numbers directly.
struct PulseRecord {
    std::uint64_t id = 0;
    PulseClass pulse_class = PulseClass::signal;
    Basis basis = Basis::rectilinear;
    std::uint8_t bit = 0;
    unsigned photon_count = 0;
    bool phase_randomized = true;
};

/// Samples a Poisson photon number truncated at n_max (tail mass lumped into
/// the n_max class) by CDF inversion on a single uniform draw.
class TruncatedPoissonSampler {
public:
    TruncatedPoissonSampler(double mean, unsigned n_max);
    unsigned sample(RandomStream& rng) const;

private:
    std::vector<double> cdf_;
};

/// Weak-coherent-pulse source emitting interleaved signal and decoy pulses.
/// Draw order per pulse: class, photon count, basis, bit.
class PulseSource {
public:
    explicit PulseSource(const SourceConfig& config);

    PulseRecord emit(RandomStream& rng);

    const SourceConfig& config() const { return config_; }

private:
    SourceConfig config_;
    TruncatedPoissonSampler signal_sampler_;
    TruncatedPoissonSampler decoy_sampler_;
    std::uint64_t next_id_ = 0;
};

/// Expands a pulse into its photon-state descriptors: photon_count identical
/// copies of the encoded BB84 state; vacuum gives an empty sequence.
std::vector<PhotonState> encode_states(const PulseRecord& pulse);

}  // namespace qkd

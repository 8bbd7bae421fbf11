#include "qkd/source.hpp"

#include <cmath>
#include <stdexcept>

#include "qkd/stats.hpp"

namespace qkd {

void SourceConfig::validate() const {
    if (!(mu > 0.0)) throw std::invalid_argument("source: mu must be > 0");
    if (!(mu_prime > 0.0)) throw std::invalid_argument("source: mu_prime must be > 0");
    if (mu == mu_prime) throw std::invalid_argument("source: mu and mu_prime must differ");
    if (!(signal_fraction > 0.0 && signal_fraction < 1.0))
        throw std::invalid_argument("source: signal_fraction must be in (0,1)");
    if (n_max < 1) throw std::invalid_argument("source: n_max must be >= 1");
}

TruncatedPoissonSampler::TruncatedPoissonSampler(double mean, unsigned n_max) {
    cdf_.resize(n_max);
    double cum = 0.0;
    for (unsigned n = 0; n < n_max; ++n) {
        cum += poisson_pmf(n, mean);
        cdf_[n] = cum;
    }
    // Tail mass past n_max-1 implicitly maps to n_max.
}

unsigned TruncatedPoissonSampler::sample(RandomStream& rng) const {
    double u = rng.next_double();
    for (unsigned n = 0; n < cdf_.size(); ++n) {
        if (u < cdf_[n]) return n;
    }
    return static_cast<unsigned>(cdf_.size());
}

namespace {

const SourceConfig& validated(const SourceConfig& config) {
    config.validate();
    return config;
}

}  // namespace

PulseSource::PulseSource(const SourceConfig& config)
    : config_(validated(config)),
      signal_sampler_(config.mu, config.n_max),
      decoy_sampler_(config.mu_prime, config.n_max) {}

PulseRecord PulseSource::emit(RandomStream& rng) {
    PulseRecord pulse;
    pulse.id = next_id_++;
    pulse.pulse_class =
        rng.bernoulli(config_.signal_fraction) ? PulseClass::signal : PulseClass::decoy;
    pulse.photon_count = (pulse.pulse_class == PulseClass::signal ? signal_sampler_
                                                                  : decoy_sampler_)
                             .sample(rng);
    pulse.basis = rng.next_bit() ? Basis::diagonal : Basis::rectilinear;
    pulse.bit = static_cast<std::uint8_t>(rng.next_bit());
    pulse.phase_randomized = true;
    return pulse;
}

std::vector<PhotonState> encode_states(const PulseRecord& pulse) {
    return std::vector<PhotonState>(pulse.photon_count, PhotonState{pulse.basis, pulse.bit});
}

}  // namespace qkd

#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "qkd/channel.hpp"
#include "qkd/detector.hpp"
#include "qkd/source.hpp"
#include "qkd/stats.hpp"

namespace qkd {

struct SessionConfig {
    SourceConfig source;
    ChannelConfig channel;
    DetectorConfig detector;
    std::uint64_t n_pulses = 1'000'000;  // >= 10^4 for verification statistics
    std::uint64_t master_seed = 1;

    void validate() const;
};

/// Full end-to-end trace: pulses[i], outcomes[i] and detections[i] describe
/// the same slot.
struct SessionLog {
    SessionConfig config;
    std::vector<PulseRecord> pulses;
    std::vector<ChannelOutcome> outcomes;
    std::vector<DetectionEvent> detections;
};

/// Deterministic given config.master_seed.
SessionLog run_session(const SessionConfig& config);

struct SiftedRecord {
    std::uint64_t pulse_id = 0;
    PulseClass pulse_class = PulseClass::signal;
    std::uint8_t alice_bit = 0;
    std::uint8_t bob_bit = 0;
    unsigned photon_class = 0;  // resolved_count
    bool error = false;
    bool key_discard = false;  // multiphoton events stay for statistics only
};

/// Keeps basis-matched, unambiguous events with at least one click.
std::vector<SiftedRecord> sift(const SessionLog& log);

enum class Verdict : std::uint8_t { secure, eavesdropper_detected, inconclusive };

const char* to_string(Verdict v);

struct ClassVerification {
    CountHistogram resolved_hist;                    // all pulses of the class
    GofResult gof;                                   // vs thinned Poisson
    std::map<unsigned, double> qber_per_n;           // e_n, n = 1..4
    std::map<unsigned, std::uint64_t> events_per_n;  // denominators behind e_n
    std::uint64_t detected = 0;
    std::uint64_t tagged_detected = 0;  // ground truth, invisible to real Bob
    std::uint64_t sifted = 0;
    double delta_empirical = 0.0;  // tagged_detected / detected
};

struct VerificationReport {
    ClassVerification signal;
    ClassVerification decoy;
    bool gof_pass = false;
    bool qber_consistency_pass = false;
    std::map<unsigned, double> qber_per_n_pooled;
    std::map<unsigned, std::uint64_t> events_per_n_pooled;
    double qber_sifted = 0.0;       // headline QBER over unambiguous sifted bits
    double delta_empirical = 0.0;   // ground-truth tagged fraction, both classes
    double delta_bound_analytic = 0.0;  // mu (1 - eta)
    Verdict verdict = Verdict::inconclusive;
    std::vector<std::string> notes;
};

/// Decoy verification: per-class photon-number goodness of fit against the
/// thinned Poisson expectation (dark-click background folded in when
/// e_dark > 0), per-n QBER equality across n and across classes within 3
/// sigma, and the tagged-fraction bookkeeping.
///
/// e_n counts a basis-matched n-click event as an error when any click lands
/// on the wrong polarization branch, so conflicting multiphoton events count
/// as errors rather than disappearing with the discarded key bit.
///
/// Returns Verdict::inconclusive when either class has fewer than 1000
/// sifted events.
VerificationReport verify(const std::vector<SiftedRecord>& sifted, const SessionLog& log,
                          const SessionConfig& config);

struct RawKey {
    std::vector<std::uint8_t> alice;
    std::vector<std::uint8_t> bob;
};

/// Raw key from both pulse classes, in sift order, with every
/// multiphoton-flagged position removed. Throws std::runtime_error unless
/// the report verdict is secure.
RawKey extract_raw_key(const std::vector<SiftedRecord>& sifted,
                       const VerificationReport& report);

}  // namespace qkd

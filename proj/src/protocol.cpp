#include "qkd/protocol.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "qkd/security.hpp"

namespace qkd {

void SessionConfig::validate() const {
    source.validate();
    channel.validate();
    detector.validate();
    if (n_pulses < 10'000)
        throw std::invalid_argument("session: need n_pulses >= 10000 for verification");
}

SessionLog run_session(const SessionConfig& config) {
    config.validate();
    SessionLog log;
    log.config = config;
    log.pulses.reserve(config.n_pulses);
    log.outcomes.reserve(config.n_pulses);
    log.detections.reserve(config.n_pulses);

    RandomStream rng(config.master_seed);
    PulseSource source(config.source);
    for (std::uint64_t i = 0; i < config.n_pulses; ++i) {
        log.pulses.push_back(source.emit(rng));
        log.outcomes.push_back(transmit(log.pulses.back(), config.channel, rng));
        log.detections.push_back(detect(log.outcomes.back(), config.detector, rng));
    }
    return log;
}

std::vector<SiftedRecord> sift(const SessionLog& log) {
    std::vector<SiftedRecord> sifted;
    for (std::size_t i = 0; i < log.pulses.size(); ++i) {
        const PulseRecord& pulse = log.pulses[i];
        const DetectionEvent& det = log.detections[i];
        if (pulse.basis != det.bob_basis) continue;
        if (det.resolved_count == 0 || det.measured_bit == MeasuredBit::ambiguous) continue;
        SiftedRecord rec;
        rec.pulse_id = pulse.id;
        rec.pulse_class = pulse.pulse_class;
        rec.alice_bit = pulse.bit;
        rec.bob_bit = static_cast<std::uint8_t>(det.measured_bit);
        rec.photon_class = det.resolved_count;
        rec.error = rec.alice_bit != rec.bob_bit;
        rec.key_discard = det.multiphoton_flag;
        sifted.push_back(rec);
    }
    return sifted;
}

const char* to_string(Verdict v) {
    switch (v) {
        case Verdict::secure: return "secure";
        case Verdict::eavesdropper_detected: return "eavesdropper_detected";
        case Verdict::inconclusive: return "inconclusive";
    }
    return "unknown";
}

namespace {

constexpr unsigned kMaxQberPhotonClass = 4;
constexpr std::uint64_t kMinQberEvents = 25;
constexpr std::uint64_t kMinSiftedPerClass = 1000;

// P(d distinct bins | k balls thrown uniformly into v bins), for d = 0..k:
// falling_factorial(v, d) * S(k, d) / v^k with Stirling numbers of the
// second kind.
std::vector<double> distinct_bin_distribution(std::size_t k, double v) {
    std::vector<std::vector<double>> stirling(k + 1, std::vector<double>(k + 1, 0.0));
    stirling[0][0] = 1.0;
    for (std::size_t i = 1; i <= k; ++i)
        for (std::size_t d = 1; d <= i; ++d)
            stirling[i][d] = d * stirling[i - 1][d] + stirling[i - 1][d - 1];

    std::vector<double> dist(k + 1, 0.0);
    if (k == 0) {
        dist[0] = 1.0;
        return dist;
    }
    double falling = 1.0;
    for (std::size_t d = 1; d <= k; ++d) {
        falling *= std::max(0.0, v - static_cast<double>(d - 1));
        dist[d] = falling * stirling[k][d] / std::pow(v, static_cast<double>(k));
    }
    return dist;
}

// Expected resolved-count class probabilities: thinned Poisson arrivals,
// same-SPD merging, then independent dark clicks across the SPD bank.
// Merging follows the no-disturbance null: a basis-matched pulse puts every
// photon on one polarization branch (collisions over n_ports bins), a
// mismatched pulse spreads them over all SPDs. Dark-photon merging is
// ignored; it shifts less mass than the test can resolve.
std::vector<double> expected_resolved_classes(double lambda, unsigned n_ports, double e_dark,
                                              std::size_t n_classes) {
    const std::size_t m = n_classes + 8;
    std::vector<double> photons(m, 0.0);
    for (std::size_t k = 0; k < m; ++k) {
        double pk = poisson_pmf(static_cast<unsigned>(k), lambda);
        if (pk <= 0.0) continue;
        auto matched = distinct_bin_distribution(k, static_cast<double>(n_ports));
        auto mismatched = distinct_bin_distribution(k, 2.0 * n_ports);
        for (std::size_t d = 0; d <= k && d < m; ++d)
            photons[d] += pk * 0.5 * (matched[d] + mismatched[d]);
    }

    const unsigned n_spds = 2 * n_ports;
    std::vector<double> darks(m, 0.0);
    if (e_dark <= 0.0) {
        darks[0] = 1.0;
    } else {
        darks[0] = std::pow(1.0 - e_dark, static_cast<double>(n_spds));
        for (std::size_t j = 0; j + 1 < m && j < n_spds; ++j) {
            darks[j + 1] = darks[j] * (static_cast<double>(n_spds - j) / (j + 1.0)) *
                           (e_dark / (1.0 - e_dark));
        }
    }

    std::vector<double> conv(m, 0.0);
    for (std::size_t a = 0; a < m; ++a)
        for (std::size_t b = 0; a + b < m; ++b) conv[a + b] += photons[a] * darks[b];

    std::vector<double> classes(n_classes, 0.0);
    double head = 0.0;
    for (std::size_t c = 0; c + 1 < n_classes; ++c) {
        classes[c] = conv[c];
        head += conv[c];
    }
    classes[n_classes - 1] = std::max(0.0, 1.0 - head);
    return classes;
}

struct QberTally {
    std::map<unsigned, std::uint64_t> events;
    std::map<unsigned, std::uint64_t> errors;
    std::map<unsigned, double> background;  // expected wrong-click rate from darks

    void add(unsigned n, bool error) {
        ++events[n];
        if (error) ++errors[n];
    }

    double rate(unsigned n) const {
        auto it = events.find(n);
        if (it == events.end() || it->second == 0) return 0.0;
        auto er = errors.find(n);
        return static_cast<double>(er == errors.end() ? 0 : er->second) /
               static_cast<double>(it->second);
    }
};

// Expected per-n wrong-click rate of basis-matched events when the only
// error source is dark clicks on wrong-branch SPDs: the background part of
// e_n, which depends on the class intensity and must be subtracted before
// intensities can be compared. Exactly zero at e_dark = 0.
std::map<unsigned, double> qber_background(double lambda, unsigned n_ports, double e_dark,
                                           unsigned max_n) {
    std::map<unsigned, double> bg;
    if (e_dark <= 0.0) {
        for (unsigned n = 1; n <= max_n; ++n) bg[n] = 0.0;
        return bg;
    }
    const std::size_t m = max_n + 6;
    std::vector<double> arrivals(m);
    for (std::size_t k = 0; k < m; ++k) arrivals[k] = poisson_pmf(static_cast<unsigned>(k), lambda);
    // Wrong-branch and right-branch dark clicks each span n_ports SPDs.
    std::vector<double> darks(m, 0.0);
    darks[0] = std::pow(1.0 - e_dark, static_cast<double>(n_ports));
    for (std::size_t j = 0; j + 1 < m && j < n_ports; ++j)
        darks[j + 1] = darks[j] * (static_cast<double>(n_ports - j) / (j + 1.0)) *
                       (e_dark / (1.0 - e_dark));
    for (unsigned n = 1; n <= max_n; ++n) {
        double p_n = 0.0;
        double p_n_wrong = 0.0;
        for (std::size_t a = 0; a <= n; ++a) {
            for (std::size_t w = 0; a + w <= n; ++w) {
                std::size_t r = n - a - w;
                double p = arrivals[a] * darks[w] * darks[r];
                p_n += p;
                if (w >= 1) p_n_wrong += p;
            }
        }
        bg[n] = p_n > 0.0 ? p_n_wrong / p_n : 0.0;
    }
    return bg;
}

// |(p1 - bg1) - (p2 - bg2)| within 3 sigma. The common (photon-side) error
// component is pooled across both samples; each side's null variance adds its
// own background back, since the backgrounds legitimately differ.
bool rates_consistent(std::uint64_t err1, std::uint64_t n1, double bg1, std::uint64_t err2,
                      std::uint64_t n2, double bg2) {
    double p1 = static_cast<double>(err1) / static_cast<double>(n1);
    double p2 = static_cast<double>(err2) / static_cast<double>(n2);
    double common = (static_cast<double>(err1 + err2) - bg1 * static_cast<double>(n1) -
                     bg2 * static_cast<double>(n2)) /
                    static_cast<double>(n1 + n2);
    common = std::max(0.0, common);
    double q1 = std::min(1.0, common + bg1);
    double q2 = std::min(1.0, common + bg2);
    double variance = q1 * (1.0 - q1) / static_cast<double>(n1) +
                      q2 * (1.0 - q2) / static_cast<double>(n2);
    return std::abs((p1 - bg1) - (p2 - bg2)) <= 3.0 * std::sqrt(variance);
}

}  // namespace

VerificationReport verify(const std::vector<SiftedRecord>& sifted, const SessionLog& log,
                          const SessionConfig& config) {
    VerificationReport report;
    const std::size_t n_classes = config.source.n_max + 2;
    report.signal.resolved_hist = CountHistogram::with_classes(n_classes);
    report.decoy.resolved_hist = CountHistogram::with_classes(n_classes);

    QberTally tally_signal, tally_decoy, tally_pooled;
    std::uint64_t key_bits = 0, key_errors = 0;

    for (std::size_t i = 0; i < log.pulses.size(); ++i) {
        const PulseRecord& pulse = log.pulses[i];
        const ChannelOutcome& outcome = log.outcomes[i];
        const DetectionEvent& det = log.detections[i];
        ClassVerification& cls =
            pulse.pulse_class == PulseClass::signal ? report.signal : report.decoy;

        cls.resolved_hist.add(det.resolved_count);
        if (det.resolved_count >= 1) {
            ++cls.detected;
            if (outcome.tagged) ++cls.tagged_detected;
        }

        if (pulse.basis == det.bob_basis && det.resolved_count >= 1 &&
            det.resolved_count <= kMaxQberPhotonClass) {
            bool wrong_click = std::any_of(
                det.clicked_spds.begin(), det.clicked_spds.end(),
                [&](std::uint16_t spd) { return (spd & 1u) != pulse.bit; });
            QberTally& tally =
                pulse.pulse_class == PulseClass::signal ? tally_signal : tally_decoy;
            tally.add(det.resolved_count, wrong_click);
            tally_pooled.add(det.resolved_count, wrong_click);
        }
    }

    for (const SiftedRecord& rec : sifted) {
        ClassVerification& cls =
            rec.pulse_class == PulseClass::signal ? report.signal : report.decoy;
        ++cls.sifted;
        if (!rec.key_discard) {
            ++key_bits;
            if (rec.error) ++key_errors;
        }
    }

    if (report.signal.sifted < kMinSiftedPerClass || report.decoy.sifted < kMinSiftedPerClass) {
        report.verdict = Verdict::inconclusive;
        report.notes.push_back("insufficient sifted statistics for verification");
        return report;
    }

    auto finish_class = [&](ClassVerification& cls, double mean, QberTally& tally) {
        auto expected = expected_resolved_classes(config.channel.eta * mean,
                                                  config.detector.n_ports,
                                                  config.detector.e_dark, n_classes);
        cls.gof = chi_square_gof(cls.resolved_hist, expected);
        tally.background = qber_background(config.channel.eta * mean, config.detector.n_ports,
                                           config.detector.e_dark, kMaxQberPhotonClass);
        for (unsigned n = 1; n <= kMaxQberPhotonClass; ++n) {
            if (tally.events.count(n)) {
                cls.qber_per_n[n] = tally.rate(n);
                cls.events_per_n[n] = tally.events[n];
            }
        }
        cls.delta_empirical = cls.detected == 0
                                  ? 0.0
                                  : static_cast<double>(cls.tagged_detected) /
                                        static_cast<double>(cls.detected);
    };
    finish_class(report.signal, config.source.mu, tally_signal);
    finish_class(report.decoy, config.source.mu_prime, tally_decoy);

    for (unsigned n = 1; n <= kMaxQberPhotonClass; ++n) {
        if (tally_pooled.events.count(n)) {
            report.qber_per_n_pooled[n] = tally_pooled.rate(n);
            report.events_per_n_pooled[n] = tally_pooled.events[n];
            // Event-weighted mix of the class backgrounds.
            double sig_n = static_cast<double>(
                tally_signal.events.count(n) ? tally_signal.events.at(n) : 0);
            double dec_n = static_cast<double>(
                tally_decoy.events.count(n) ? tally_decoy.events.at(n) : 0);
            tally_pooled.background[n] =
                (sig_n * tally_signal.background[n] + dec_n * tally_decoy.background[n]) /
                static_cast<double>(tally_pooled.events.at(n));
        }
    }

    report.gof_pass = report.signal.gof.pass && report.decoy.gof.pass;
    if (!report.signal.gof.pass) report.notes.push_back("signal photon-number statistics abnormal");
    if (!report.decoy.gof.pass) report.notes.push_back("decoy photon-number statistics abnormal");

    // QBER consistency. Two nulls, both "the channel disturbs every photon
    // alike, plus known dark background":
    //  - across intensities: e_n(signal) and e_n(decoy) share the photon-side
    //    component, so the background-centered rates must agree;
    //  - across photon numbers: an n-click event errs when any of its photons
    //    does, so e_n must track 1 - (1-e)^n for the per-photon rate e
    //    inferred from the single-click events.
    report.qber_consistency_pass = true;
    auto check_cross_class = [&](unsigned n) {
        auto ea = tally_signal.events.find(n);
        auto eb = tally_decoy.events.find(n);
        if (ea == tally_signal.events.end() || eb == tally_decoy.events.end()) return;
        if (ea->second < kMinQberEvents || eb->second < kMinQberEvents) return;
        std::uint64_t erra = tally_signal.errors.count(n) ? tally_signal.errors.at(n) : 0;
        std::uint64_t errb = tally_decoy.errors.count(n) ? tally_decoy.errors.at(n) : 0;
        if (!rates_consistent(erra, ea->second, tally_signal.background[n], errb, eb->second,
                              tally_decoy.background[n])) {
            report.qber_consistency_pass = false;
            report.notes.push_back("qber inconsistency: signal vs decoy e_" +
                                   std::to_string(n));
        }
    };
    for (unsigned n = 1; n <= kMaxQberPhotonClass; ++n) check_cross_class(n);

    if (tally_pooled.events.count(1) && tally_pooled.events.at(1) >= kMinQberEvents) {
        const double n1 = static_cast<double>(tally_pooled.events.at(1));
        const double e1 = tally_pooled.rate(1);
        const double bg1 = tally_pooled.background[1];
        // Per-photon rate implied by the single-click events.
        const double per_photon =
            std::max(0.0, 1.0 - (1.0 - e1) / std::max(1e-12, 1.0 - bg1));
        const double var_per_photon =
            e1 * (1.0 - e1) / n1 / ((1.0 - bg1) * (1.0 - bg1));
        for (unsigned n = 2; n <= kMaxQberPhotonClass; ++n) {
            if (!tally_pooled.events.count(n)) continue;
            const double events = static_cast<double>(tally_pooled.events.at(n));
            if (events < static_cast<double>(kMinQberEvents)) continue;
            const double errors = static_cast<double>(
                tally_pooled.errors.count(n) ? tally_pooled.errors.at(n) : 0);
            const double bg = tally_pooled.background[n];
            const double clean = std::pow(1.0 - per_photon, static_cast<double>(n));
            const double expected_rate = 1.0 - clean * (1.0 - bg);
            const double slope = n * std::pow(1.0 - per_photon, n - 1.0) * (1.0 - bg);
            double var_count = events * expected_rate * (1.0 - expected_rate) +
                               events * events * slope * slope * var_per_photon + 0.25;
            if (std::abs(errors - events * expected_rate) >
                3.0 * std::sqrt(var_count) + 1.0) {
                report.qber_consistency_pass = false;
                report.notes.push_back("qber inconsistency: e_" + std::to_string(n) +
                                       " vs e_1");
            }
        }
    }

    std::uint64_t detected = report.signal.detected + report.decoy.detected;
    std::uint64_t tagged = report.signal.tagged_detected + report.decoy.tagged_detected;
    report.delta_empirical =
        detected == 0 ? 0.0 : static_cast<double>(tagged) / static_cast<double>(detected);
    report.delta_bound_analytic = delta_bound(config.source.mu, config.channel.eta);
    report.qber_sifted =
        key_bits == 0 ? 0.0 : static_cast<double>(key_errors) / static_cast<double>(key_bits);

    report.verdict = report.gof_pass && report.qber_consistency_pass
                         ? Verdict::secure
                         : Verdict::eavesdropper_detected;
    return report;
}

RawKey extract_raw_key(const std::vector<SiftedRecord>& sifted,
                       const VerificationReport& report) {
    if (report.verdict != Verdict::secure)
        throw std::runtime_error("extract_raw_key: verification verdict is not secure");
    RawKey key;
    for (const SiftedRecord& rec : sifted) {
        if (rec.key_discard) continue;
        key.alice.push_back(rec.alice_bit);
        key.bob.push_back(rec.bob_bit);
    }
    return key;
}

}  // namespace qkd

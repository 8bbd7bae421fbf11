#include <doctest.h>

#include <cmath>

#include "qkd/protocol.hpp"

using namespace qkd;

namespace {

SessionConfig make_session(double mu, double eta, AttackKind attack, double e_dark,
                           std::uint64_t pulses, std::uint64_t seed) {
    SessionConfig cfg;
    cfg.source.mu = mu;
    cfg.channel.eta = eta;
    cfg.channel.attack = attack;
    cfg.detector.e_dark = e_dark;
    cfg.n_pulses = pulses;
    cfg.master_seed = seed;
    return cfg;
}

// Exact tagged fraction among detected pulses under per-photon capture with
// probability 1-eta: P(capture>=1 and forward>=1) / P(forward>=1).
double tagged_fraction_exact(double mu, double eta) {
    double num = 1.0 + std::exp(-mu) - std::exp(-mu * (1.0 - eta)) - std::exp(-mu * eta);
    return num / (1.0 - std::exp(-mu * eta));
}

}  // namespace

TEST_CASE("session config validation") {
    SessionConfig cfg = make_session(0.1, 0.1, AttackKind::none, 0.0, 5000, 1);
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg.n_pulses = 10'000;
    CHECK_NOTHROW(cfg.validate());
}

TEST_CASE("identical seeds give identical logs") {
    SessionConfig cfg = make_session(0.2, 0.2, AttackKind::pns, 1e-4, 20'000, 99);
    SessionLog a = run_session(cfg);
    SessionLog b = run_session(cfg);
    REQUIRE(a.pulses.size() == b.pulses.size());
    for (std::size_t i = 0; i < a.pulses.size(); ++i) {
        REQUIRE(a.pulses[i].photon_count == b.pulses[i].photon_count);
        REQUIRE(a.pulses[i].bit == b.pulses[i].bit);
        REQUIRE(a.outcomes[i].forwarded.size() == b.outcomes[i].forwarded.size());
        REQUIRE(a.outcomes[i].tagged == b.outcomes[i].tagged);
        REQUIRE(a.detections[i].clicked_spds == b.detections[i].clicked_spds);
        REQUIRE(a.detections[i].bob_basis == b.detections[i].bob_basis);
    }
}

TEST_CASE("perfect channel yields an error-free sift") {
    SessionConfig cfg = make_session(0.2, 1.0, AttackKind::none, 0.0, 50'000, 3);
    SessionLog log = run_session(cfg);
    for (const SiftedRecord& rec : sift(log)) CHECK_FALSE(rec.error);
}

TEST_CASE("sift keeps only basis-matched unambiguous detections") {
    SessionConfig cfg = make_session(0.3, 0.5, AttackKind::none, 1e-4, 100'000, 4);
    SessionLog log = run_session(cfg);
    auto sifted = sift(log);

    std::uint64_t expected = 0;
    for (std::size_t i = 0; i < log.pulses.size(); ++i) {
        const auto& det = log.detections[i];
        if (log.pulses[i].basis == det.bob_basis && det.resolved_count >= 1 &&
            det.measured_bit != MeasuredBit::ambiguous)
            ++expected;
    }
    CHECK(sifted.size() == expected);

    bool saw_multiphoton = false;
    for (const SiftedRecord& rec : sifted) {
        const auto& det = log.detections[rec.pulse_id];
        CHECK(log.pulses[rec.pulse_id].basis == det.bob_basis);
        CHECK(det.measured_bit != MeasuredBit::ambiguous);
        CHECK(rec.photon_class == det.resolved_count);
        if (rec.photon_class >= 2) {
            CHECK(rec.key_discard);
            saw_multiphoton = true;
        }
    }
    CHECK(saw_multiphoton);  // retained for statistics, flagged for discard
}

TEST_CASE("sift size matches the detection-probability estimate") {
    SessionConfig cfg = make_session(0.1, 0.1, AttackKind::none, 0.0, 1'000'000, 5);
    SessionLog log = run_session(cfg);
    auto sifted = sift(log);
    double p_signal = 1.0 - std::exp(-0.1 * 0.1);
    double p_decoy = 1.0 - std::exp(-0.1 * 0.5);
    double p_sift = 0.5 * (0.5 * p_signal + 0.5 * p_decoy);
    double expected = 1e6 * p_sift;
    double sigma = std::sqrt(1e6 * p_sift * (1.0 - p_sift));
    CHECK(std::abs(static_cast<double>(sifted.size()) - expected) <= 3.0 * sigma);
}

TEST_CASE("sifting keeps about half of the unambiguous detections") {
    SessionConfig cfg = make_session(0.1, 0.1, AttackKind::none, 0.0, 1'000'000, 6);
    SessionLog log = run_session(cfg);
    auto sifted = sift(log);
    std::uint64_t unambiguous = 0;
    for (const auto& det : log.detections)
        if (det.resolved_count >= 1 && det.measured_bit != MeasuredBit::ambiguous)
            ++unambiguous;
    double ratio = static_cast<double>(sifted.size()) / static_cast<double>(unambiguous);
    double sigma = std::sqrt(0.25 / static_cast<double>(unambiguous));
    CHECK(std::abs(ratio - 0.5) <= 3.0 * sigma);
}

TEST_CASE("clean sessions verify secure") {
    int secure = 0;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        SessionConfig cfg = make_session(0.1, 0.1, AttackKind::none, 1e-5, 1'000'000, seed);
        SessionLog log = run_session(cfg);
        auto sifted = sift(log);
        VerificationReport report = verify(sifted, log, cfg);
        if (report.verdict == Verdict::secure) ++secure;
        if (cfg.detector.e_dark == 0.0) CHECK(report.qber_sifted == 0.0);
    }
    CHECK(secure >= 9);  // nominal false-alarm rate stays below 5%
}

TEST_CASE("noise-free session has exactly zero QBER") {
    SessionConfig cfg = make_session(0.1, 0.1, AttackKind::none, 0.0, 1'000'000, 11);
    SessionLog log = run_session(cfg);
    auto sifted = sift(log);
    VerificationReport report = verify(sifted, log, cfg);
    CHECK(report.qber_sifted == 0.0);
    for (const auto& [n, e] : report.qber_per_n_pooled) CHECK(e == 0.0);
}

TEST_CASE("splitting attack stays statistically invisible") {
    SessionConfig cfg = make_session(0.2, 0.1, AttackKind::pns, 0.0, 1'000'000, 11);
    SessionLog log = run_session(cfg);
    auto sifted = sift(log);
    VerificationReport report = verify(sifted, log, cfg);
    CHECK(report.verdict == Verdict::secure);
    CHECK(report.gof_pass);
    // Security accounting falls back to the tagged-fraction bound.
    CHECK(report.signal.delta_empirical <= 0.2);
    CHECK(report.delta_bound_analytic == doctest::Approx(0.18).epsilon(1e-12));
}

TEST_CASE("tagged fraction follows the per-photon capture model and stays under mu") {
    for (double eta : {0.05, 0.1}) {
        SessionConfig cfg = make_session(0.2, eta, AttackKind::pns, 0.0, 1'000'000, 13);
        SessionLog log = run_session(cfg);
        auto sifted = sift(log);
        VerificationReport report = verify(sifted, log, cfg);
        double expected = tagged_fraction_exact(0.2, eta);
        double n = static_cast<double>(report.signal.detected);
        double sigma = std::sqrt(expected * (1.0 - expected) / n);
        INFO("eta=", eta, " delta=", report.signal.delta_empirical, " model=", expected);
        CHECK(std::abs(report.signal.delta_empirical - expected) <= 3.0 * sigma);
        CHECK(report.signal.delta_empirical <= 0.2);
    }
}

TEST_CASE("replacement attack is detected through the multiphoton QBER") {
    SessionConfig cfg = make_session(0.3, 0.2, AttackKind::pnsr, 0.0, 1'000'000, 14);
    SessionLog log = run_session(cfg);
    auto sifted = sift(log);
    VerificationReport report = verify(sifted, log, cfg);
    CHECK(report.verdict == Verdict::eavesdropper_detected);
    REQUIRE(report.qber_per_n_pooled.count(1));
    REQUIRE(report.qber_per_n_pooled.count(2));
    CHECK(report.qber_per_n_pooled.at(2) - report.qber_per_n_pooled.at(1) >= 0.2);
}

TEST_CASE("uniform per-photon disturbance keeps the per-n QBERs consistent") {
    // An individual attack that disturbs every forwarded photon alike must
    // not trip the photon-number-dependent checks.
    SessionConfig cfg = make_session(0.3, 0.2, AttackKind::si, 0.0, 1'000'000, 15);
    cfg.channel.params.si_error_rate = 0.05;
    SessionLog log = run_session(cfg);
    auto sifted = sift(log);
    VerificationReport report = verify(sifted, log, cfg);
    CHECK(report.qber_consistency_pass);
    CHECK(report.qber_per_n_pooled.at(1) == doctest::Approx(0.05).epsilon(0.15));
}

TEST_CASE("thin sessions come back inconclusive, not secure") {
    SessionConfig cfg = make_session(0.1, 0.05, AttackKind::none, 0.0, 10'000, 16);
    SessionLog log = run_session(cfg);
    auto sifted = sift(log);
    VerificationReport report = verify(sifted, log, cfg);
    CHECK(report.verdict == Verdict::inconclusive);
    CHECK_THROWS_AS(extract_raw_key(sifted, report), std::runtime_error);
}

TEST_CASE("raw key excludes every multiphoton-flagged position") {
    SessionConfig cfg = make_session(0.3, 0.3, AttackKind::none, 0.0, 1'000'000, 17);
    SessionLog log = run_session(cfg);
    auto sifted = sift(log);
    VerificationReport report = verify(sifted, log, cfg);
    REQUIRE(report.verdict == Verdict::secure);
    RawKey key = extract_raw_key(sifted, report);
    CHECK(key.alice.size() == key.bob.size());

    std::uint64_t eligible = 0;
    bool decoy_contributes = false;
    for (const SiftedRecord& rec : sifted) {
        if (rec.key_discard) continue;
        ++eligible;
        if (rec.pulse_class == PulseClass::decoy) decoy_contributes = true;
    }
    CHECK(key.alice.size() == eligible);
    CHECK(decoy_contributes);  // both pulse classes feed the raw key
    for (std::size_t i = 0; i < key.alice.size(); ++i) CHECK(key.alice[i] == key.bob[i]);
}

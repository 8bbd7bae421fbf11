#include <doctest.h>

#include <cmath>

#include "qkd/detector.hpp"
#include "qkd/stats.hpp"

using namespace qkd;

namespace {

DetectorConfig make_detector(unsigned ports, double e_dark = 0.0) {
    DetectorConfig cfg;
    cfg.n_ports = ports;
    cfg.e_dark = e_dark;
    return cfg;
}

ChannelOutcome make_arrival(std::initializer_list<PhotonState> photons) {
    ChannelOutcome out;
    out.forwarded.assign(photons);
    return out;
}

}  // namespace

TEST_CASE("detector config validation") {
    CHECK_NOTHROW(make_detector(1).validate());
    CHECK_NOTHROW(make_detector(64).validate());
    CHECK_THROWS_AS(make_detector(12).validate(), std::invalid_argument);
    CHECK_THROWS_AS(make_detector(0).validate(), std::invalid_argument);
    CHECK_THROWS_AS(make_detector(16, 1.0).validate(), std::invalid_argument);
}

TEST_CASE("no photons and no darks resolve to nothing") {
    RandomStream rng(1);
    DetectionEvent ev = detect(make_arrival({}), make_detector(16), rng);
    CHECK(ev.resolved_count == 0);
    CHECK(ev.measured_bit == MeasuredBit::ambiguous);
    CHECK_FALSE(ev.multiphoton_flag);
}

TEST_CASE("matched-basis single photon reads back the encoded bit") {
    RandomStream rng(2);
    DetectorConfig cfg = make_detector(16);
    int matched = 0;
    for (int i = 0; i < 10'000; ++i) {
        DetectionEvent ev =
            detect(make_arrival({PhotonState{Basis::diagonal, 1}}), cfg, rng);
        if (ev.bob_basis != Basis::diagonal) continue;
        ++matched;
        REQUIRE(ev.resolved_count == 1);
        CHECK(ev.measured_bit == MeasuredBit::one);
    }
    CHECK(matched > 4000);  // basis choice is a fair coin
}

TEST_CASE("same-polarization pair collides at the enumerated port rate") {
    // Conditioned on both photons measured in the same polarization, a
    // collision needs the same port: 16 of 16^2 equally likely pairs.
    RandomStream rng(3);
    DetectorConfig cfg = make_detector(16);
    int same_pol = 0, collided = 0;
    for (int i = 0; i < 100'000; ++i) {
        DetectionEvent ev = detect(
            make_arrival({PhotonState{Basis::rectilinear, 0}, PhotonState{Basis::rectilinear, 0}}),
            cfg, rng);
        REQUIRE(ev.resolved_count >= 1);
        bool one_branch = ev.measured_bit != MeasuredBit::ambiguous;
        if (!one_branch) continue;  // split across branches, cannot collide
        ++same_pol;
        if (ev.resolved_count == 1) ++collided;
    }
    double rate = collided / static_cast<double>(same_pol);
    CHECK(std::abs(rate - 1.0 / 16.0) < 0.005);
}

TEST_CASE("collision probability closed form") {
    CHECK(collision_probability(2, make_detector(1)) == doctest::Approx(1.0));
    CHECK(collision_probability(2, make_detector(16)) == doctest::Approx(0.0625).epsilon(1e-15));
    CHECK(collision_probability(3, make_detector(64)) ==
          doctest::Approx(0.04638671875).epsilon(1e-15));
    CHECK_THROWS_AS(collision_probability(1, make_detector(16)), std::domain_error);
}

TEST_CASE("collision probability matches port-tuple enumeration") {
    // Brute-force count of colliding triples over 64^3 assignments.
    unsigned ports = 64;
    std::uint64_t collisions = 0;
    for (unsigned a = 0; a < ports; ++a)
        for (unsigned b = 0; b < ports; ++b)
            for (unsigned c = 0; c < ports; ++c)
                if (a == b || b == c || a == c) ++collisions;
    double enumerated = static_cast<double>(collisions) / (64.0 * 64.0 * 64.0);
    CHECK(collision_probability(3, make_detector(64)) ==
          doctest::Approx(enumerated).epsilon(1e-12));
}

TEST_CASE("distinct polarizations never merge") {
    RandomStream rng(4);
    DetectorConfig cfg = make_detector(4);
    for (int i = 0; i < 5000; ++i) {
        DetectionEvent ev = detect(
            make_arrival({PhotonState{Basis::rectilinear, 0}, PhotonState{Basis::rectilinear, 1}}),
            cfg, rng);
        if (ev.bob_basis != Basis::rectilinear) continue;
        CHECK(ev.resolved_count == 2);
        CHECK(ev.measured_bit == MeasuredBit::ambiguous);
        CHECK(ev.multiphoton_flag);
    }
}

TEST_CASE("dark clicks fire independently at the configured rate") {
    RandomStream rng(5);
    DetectorConfig cfg = make_detector(16, 1e-3);
    std::uint64_t slots = 200'000;
    std::uint64_t dark_total = 0;
    for (std::uint64_t i = 0; i < slots; ++i)
        dark_total += detect(make_arrival({}), cfg, rng).dark_clicks;
    double per_spd = dark_total / static_cast<double>(slots * cfg.spd_count());
    double sigma = std::sqrt(1e-3 * (1.0 - 1e-3) / static_cast<double>(slots * cfg.spd_count()));
    CHECK(std::abs(per_spd - 1e-3) <= 3.0 * sigma);

    // Rate is unchanged when photons arrive.
    RandomStream rng2(6);
    std::uint64_t dark_with_photons = 0;
    for (std::uint64_t i = 0; i < slots; ++i)
        dark_with_photons +=
            detect(make_arrival({PhotonState{Basis::rectilinear, 0}}), cfg, rng2).dark_clicks;
    double per_spd2 = dark_with_photons / static_cast<double>(slots * cfg.spd_count());
    CHECK(std::abs(per_spd2 - 1e-3) <= 3.0 * sigma);
}

TEST_CASE("photon plus dark click flags a multiphoton event") {
    RandomStream rng(7);
    DetectorConfig cfg = make_detector(4, 0.2);
    bool saw_dark_multiphoton = false;
    for (int i = 0; i < 500; ++i) {
        DetectionEvent ev =
            detect(make_arrival({PhotonState{Basis::rectilinear, 0}}), cfg, rng);
        if (ev.dark_clicks > 0 && ev.resolved_count >= 2) {
            CHECK(ev.multiphoton_flag);
            saw_dark_multiphoton = true;
        }
    }
    CHECK(saw_dark_multiphoton);
}

TEST_CASE("resolved counts of a thinned source stay Poissonian at wide fan-out") {
    // At 64 ports the collision distortion sits below the test power, so the
    // resolved-count histogram matches the bare thinned Poissonian.
    RandomStream rng(8);
    DetectorConfig cfg = make_detector(64);
    TruncatedPoissonSampler sampler(0.2, 12);
    ChannelConfig channel;
    channel.eta = 0.1;
    CountHistogram hist = CountHistogram::with_classes(8);
    for (int i = 0; i < 1'000'000; ++i) {
        PulseRecord pulse;
        pulse.photon_count = sampler.sample(rng);
        pulse.basis = rng.next_bit() ? Basis::diagonal : Basis::rectilinear;
        pulse.bit = static_cast<std::uint8_t>(rng.next_bit());
        DetectionEvent ev = detect(transmit_lossy(pulse, channel, rng), cfg, rng);
        hist.add(ev.resolved_count);
    }
    CHECK(chi_square_gof(hist, poisson_pmf_classes(0.02, 8)).pass);
}

TEST_CASE("multiphoton fraction among detected pulses tracks mu eta / 2") {
    RandomStream rng(9);
    DetectorConfig cfg = make_detector(64);
    TruncatedPoissonSampler sampler(0.2, 12);
    ChannelConfig channel;
    channel.eta = 0.1;
    std::uint64_t detected = 0, multi = 0;
    for (int i = 0; i < 1'000'000; ++i) {
        PulseRecord pulse;
        pulse.photon_count = sampler.sample(rng);
        pulse.basis = rng.next_bit() ? Basis::diagonal : Basis::rectilinear;
        pulse.bit = static_cast<std::uint8_t>(rng.next_bit());
        DetectionEvent ev = detect(transmit_lossy(pulse, channel, rng), cfg, rng);
        if (ev.resolved_count >= 1) ++detected;
        if (ev.resolved_count >= 2) ++multi;
    }
    double fraction = static_cast<double>(multi) / static_cast<double>(detected);
    double approx = 0.2 * 0.1 / 2.0;  // first-order multiphoton-detection rate
    double sigma = std::sqrt(approx * (1.0 - approx) / static_cast<double>(detected));
    CHECK(std::abs(fraction - approx) <= 3.0 * sigma);
    CHECK(std::abs(fraction - approx) / approx <= 0.25);
}

TEST_CASE("dark-count budget verdicts") {
    DarkBudgetReport pass = check_dark_count_budget(make_detector(16, 1e-5), 0.1, 0.1);
    CHECK(pass.budget == doctest::Approx(1.6e-4).epsilon(1e-12));
    CHECK(pass.limit == doctest::Approx(5e-3).epsilon(1e-12));
    CHECK(pass.pass);

    CHECK(check_dark_count_budget(make_detector(16, 0.0), 0.1, 0.1).pass);

    DarkBudgetReport fail = check_dark_count_budget(make_detector(1024, 1e-5), 0.1, 0.1);
    CHECK(fail.budget == doctest::Approx(1.024e-2).epsilon(1e-12));
    CHECK_FALSE(fail.pass);

    // The budget can optionally count both polarization branches.
    DetectorConfig both = make_detector(16, 1e-5);
    both.dark_budget_ports_factor = 2;
    CHECK(check_dark_count_budget(both, 0.1, 0.1).budget ==
          doctest::Approx(3.2e-4).epsilon(1e-12));
}

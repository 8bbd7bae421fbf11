#include <doctest.h>

#include <cmath>

#include "qkd/source.hpp"
#include "qkd/stats.hpp"

using namespace qkd;

namespace {

SourceConfig default_config() {
    SourceConfig cfg;
    cfg.mu = 0.1;
    cfg.mu_prime = 0.5;
    cfg.signal_fraction = 0.5;
    cfg.n_max = 10;
    return cfg;
}

}  // namespace

TEST_CASE("source config validation") {
    SourceConfig cfg = default_config();
    CHECK_NOTHROW(cfg.validate());
    cfg.mu = 0.0;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg = default_config();
    cfg.mu_prime = cfg.mu;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg = default_config();
    cfg.signal_fraction = 1.0;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}

TEST_CASE("vacuum limit emits no photons") {
    SourceConfig cfg = default_config();
    cfg.mu = 1e-12;
    PulseSource source(cfg);
    RandomStream rng(3);
    for (int i = 0; i < 20'000; ++i) {
        PulseRecord pulse = source.emit(rng);
        if (pulse.pulse_class == PulseClass::signal) CHECK(pulse.photon_count == 0);
    }
}

TEST_CASE("signal photon numbers follow the configured Poisson") {
    PulseSource source(default_config());
    RandomStream rng(17);
    CountHistogram hist = CountHistogram::with_classes(7);
    for (int i = 0; i < 2'000'000 && hist.total < 1'000'000; ++i) {
        PulseRecord pulse = source.emit(rng);
        if (pulse.pulse_class == PulseClass::signal) hist.add(pulse.photon_count);
    }
    REQUIRE(hist.total == 1'000'000);
    auto expected = poisson_pmf_classes(0.1, 7);
    CHECK(chi_square_gof(hist, expected).pass);
}

TEST_CASE("class split is binomial around the signal fraction") {
    PulseSource source(default_config());
    RandomStream rng(91);
    std::uint64_t signal = 0;
    constexpr std::uint64_t kPulses = 1'000'000;
    for (std::uint64_t i = 0; i < kPulses; ++i) {
        if (source.emit(rng).pulse_class == PulseClass::signal) ++signal;
    }
    // 3 sigma of Binomial(1e6, 0.5) is 1500.
    CHECK(signal > 500'000 - 1500);
    CHECK(signal < 500'000 + 1500);
}

TEST_CASE("multiphoton fraction among nonempty pulses") {
    PulseSource source(default_config());
    RandomStream rng(7);
    std::uint64_t nonempty = 0, multi = 0;
    for (int i = 0; i < 2'000'000; ++i) {
        PulseRecord pulse = source.emit(rng);
        if (pulse.pulse_class != PulseClass::signal || pulse.photon_count == 0) continue;
        ++nonempty;
        if (pulse.photon_count > 1) ++multi;
    }
    double p = multiphoton_given_nonempty(0.1);
    double sigma = std::sqrt(p * (1.0 - p) / static_cast<double>(nonempty));
    CHECK(std::abs(static_cast<double>(multi) / static_cast<double>(nonempty) - p) <=
          3.0 * sigma);
}

TEST_CASE("split seeds give distinct independent streams") {
    std::uint64_t master = 77;
    std::uint64_t a = split_seed(master, 0);
    std::uint64_t b = split_seed(master, 1);
    CHECK(a != b);
    CHECK(a != master);
    RandomStream sa(a);
    RandomStream sb(b);
    int equal = 0;
    for (int i = 0; i < 64; ++i)
        if (sa.next_bit() == sb.next_bit()) ++equal;
    CHECK(equal < 64);  // streams decorrelate
    CHECK(split_seed(master, 0) == a);
}

TEST_CASE("identical seed reproduces the pulse train exactly") {
    PulseSource a(default_config());
    PulseSource b(default_config());
    RandomStream rng_a(1234);
    RandomStream rng_b(1234);
    for (int i = 0; i < 50'000; ++i) {
        PulseRecord pa = a.emit(rng_a);
        PulseRecord pb = b.emit(rng_b);
        REQUIRE(pa.id == pb.id);
        REQUIRE(pa.pulse_class == pb.pulse_class);
        REQUIRE(pa.basis == pb.basis);
        REQUIRE(pa.bit == pb.bit);
        REQUIRE(pa.photon_count == pb.photon_count);
    }
}

TEST_CASE("photon count never exceeds the truncation bound") {
    SourceConfig cfg = default_config();
    cfg.mu = 1.0;
    cfg.mu_prime = 0.9;
    cfg.n_max = 4;
    PulseSource source(cfg);
    RandomStream rng(5);
    for (int i = 0; i < 100'000; ++i) CHECK(source.emit(rng).photon_count <= 4);
}

TEST_CASE("encode_states replicates the pulse state") {
    PulseRecord pulse;
    pulse.photon_count = 0;
    CHECK(encode_states(pulse).empty());

    pulse.basis = Basis::rectilinear;
    pulse.bit = 0;
    pulse.photon_count = 2;
    auto rect = encode_states(pulse);
    REQUIRE(rect.size() == 2);
    for (const PhotonState& s : rect) {
        CHECK(s.basis == Basis::rectilinear);
        CHECK(s.bit == 0);
    }

    pulse.basis = Basis::diagonal;
    pulse.bit = 1;
    pulse.photon_count = 3;
    auto diag = encode_states(pulse);
    REQUIRE(diag.size() == 3);
    for (const PhotonState& s : diag) {
        CHECK(s.basis == Basis::diagonal);
        CHECK(s.bit == 1);
    }
}

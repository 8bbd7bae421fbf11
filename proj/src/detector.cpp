#include "qkd/detector.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace qkd {

void DetectorConfig::validate() const {
    if (n_ports < 1 || (n_ports & (n_ports - 1)) != 0)
        throw std::invalid_argument("detector: n_ports must be a power of two >= 1");
    if (!(e_dark >= 0.0 && e_dark < 1.0))
        throw std::invalid_argument("detector: e_dark must be in [0,1)");
    if (dark_budget_ports_factor != 1 && dark_budget_ports_factor != 2)
        throw std::invalid_argument("detector: dark_budget_ports_factor must be 1 or 2");
}

namespace {

// Visits the SPDs that dark-click this slot via geometric gap sampling;
// equivalent to an independent Bernoulli(e_dark) draw per SPD.
template <typename Fire>
void sample_dark_clicks(unsigned n_spds, double e_dark, RandomStream& rng, Fire&& fire) {
    if (e_dark <= 0.0) return;
    const double log1m = std::log1p(-e_dark);
    double next = 0.0;
    while (true) {
        double gap = std::floor(std::log1p(-rng.next_double()) / log1m);
        next += gap;
        if (!(next < static_cast<double>(n_spds))) break;
        fire(static_cast<std::uint16_t>(next));
        next += 1.0;
    }
}

}  // namespace

DetectionEvent detect(const ChannelOutcome& outcome, const DetectorConfig& config,
                      RandomStream& rng) {
    DetectionEvent event;
    event.pulse_id = outcome.pulse_id;
    event.bob_basis = rng.next_bit() ? Basis::diagonal : Basis::rectilinear;

    for (const PhotonState& photon : outcome.forwarded) {
        std::uint32_t port = rng.next_index_pow2(config.n_ports);
        int bit = photon.basis == event.bob_basis ? photon.bit : rng.next_bit();
        event.clicked_spds.push_back(static_cast<std::uint16_t>(port * 2 + bit));
    }

    sample_dark_clicks(config.spd_count(), config.e_dark, rng, [&](std::uint16_t spd) {
        event.clicked_spds.push_back(spd);
        ++event.dark_clicks;
    });

    std::sort(event.clicked_spds.begin(), event.clicked_spds.end());
    event.clicked_spds.erase(std::unique(event.clicked_spds.begin(), event.clicked_spds.end()),
                             event.clicked_spds.end());
    event.resolved_count = static_cast<unsigned>(event.clicked_spds.size());
    event.multiphoton_flag = event.resolved_count >= 2;

    bool saw_zero = false;
    bool saw_one = false;
    for (std::uint16_t spd : event.clicked_spds) {
        (spd & 1u ? saw_one : saw_zero) = true;
    }
    if (saw_zero == saw_one) {
        event.measured_bit = MeasuredBit::ambiguous;  // no clicks or conflicting clicks
    } else {
        event.measured_bit = saw_one ? MeasuredBit::one : MeasuredBit::zero;
    }
    return event;
}

double collision_probability(unsigned n_photons, const DetectorConfig& config) {
    if (n_photons < 2)
        throw std::domain_error("collision_probability: need n_photons >= 2");
    double no_collision = 1.0;
    for (unsigned k = 1; k < n_photons; ++k) {
        double free_fraction = 1.0 - static_cast<double>(k) / config.n_ports;
        no_collision *= std::max(0.0, free_fraction);
    }
    return 1.0 - no_collision;
}

DarkBudgetReport check_dark_count_budget(const DetectorConfig& config, double mu, double eta) {
    DarkBudgetReport report;
    report.budget = static_cast<double>(config.n_ports) * config.dark_budget_ports_factor *
                    config.e_dark;
    report.limit = mu * eta / 2.0;
    report.pass = report.budget < report.limit;
    return report;
}

}  // namespace qkd

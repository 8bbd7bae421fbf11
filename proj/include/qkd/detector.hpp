#pragma once

#include <cstdint>
#include <vector>

#include "qkd/channel.hpp"
#include "qkd/rng.hpp"
#include "qkd/source.hpp"

namespace qkd {

/// Balanced beam-splitter cascade fanned out to n_ports leaf ports, one
/// polarization analyzer per port, one SPD per analyzer output
/// (2 * n_ports SPDs total). SPD index = port * 2 + branch bit.
struct DetectorConfig {
    unsigned n_ports = 16;  // power of two >= 1
    double e_dark = 1e-5;   // per SPD per pulse slot
    // The dark-count budget compares N * e_dark against mu*eta/2; N defaults
    // to the port count, set 2 to count every SPD instead.
    unsigned dark_budget_ports_factor = 1;

    void validate() const;
    unsigned spd_count() const { return 2 * n_ports; }
};

enum class MeasuredBit : std::uint8_t { zero = 0, one = 1, ambiguous = 2 };

struct DetectionEvent {
    std::uint64_t pulse_id = 0;
    std::vector<std::uint16_t> clicked_spds;  // sorted, unique
    unsigned resolved_count = 0;              // = clicked_spds.size()
    MeasuredBit measured_bit = MeasuredBit::ambiguous;
    Basis bob_basis = Basis::rectilinear;
    unsigned dark_clicks = 0;     // dark draws that fired this slot
    bool multiphoton_flag = false;  // resolved_count >= 2, dark or not
};

/// Routes each arriving photon to a uniform port, measures it in Bob's basis
/// (deterministic on basis match, fair coin otherwise), adds independent dark
/// clicks on every SPD, and collapses same-SPD hits into one click.
/// measured_bit is ambiguous when clicks disagree or nothing clicked.
DetectionEvent detect(const ChannelOutcome& outcome, const DetectorConfig& config,
                      RandomStream& rng);

/// Probability that >= 2 of n_photons identically polarized photons share an
/// SPD: 1 - prod_{k=1}^{n-1} (1 - k/n_ports). Throws std::domain_error for
/// n_photons < 2.
double collision_probability(unsigned n_photons, const DetectorConfig& config);

struct DarkBudgetReport {
    double budget = 0.0;  // N * e_dark
    double limit = 0.0;   // mu * eta / 2
    bool pass = false;    // budget < limit
};

DarkBudgetReport check_dark_count_budget(const DetectorConfig& config, double mu, double eta);

}  // namespace qkd

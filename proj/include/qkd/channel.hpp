#pragma once

#include <array>
#include <complex>
#include <cstdint>
#include <vector>

#include "qkd/rng.hpp"
#include "qkd/source.hpp"

namespace qkd {

enum class AttackKind : std::uint8_t { none, pns, pnsr, si, cmp };

/// How Eve prepares the false photon in a PNSR substitution.
enum class SubstituteModel : std::uint8_t { intercept_resend, random_state };

struct AttackParams {
    SubstituteModel substitute_model = SubstituteModel::intercept_resend;
    // Per-photon disturbance for the error-rate SI/CMP path. The two attacks
    // share mechanics because U (x) U disturbs each photon like a lone SI
    // unitary would; the state-vector kernel below validates that equality.
    double si_error_rate = 0.0;
};

struct ChannelConfig {
    double eta = 0.1;  // end-to-end transmittance, detector efficiency included
    AttackKind attack = AttackKind::none;
    AttackParams params;

    void validate() const;
};

struct ChannelOutcome {
    std::uint64_t pulse_id = 0;
    std::vector<PhotonState> forwarded;
    unsigned eve_captured = 0;
    bool substituted = false;
    // Eve holds at least one photon while Bob can still see the pulse: she
    // learns the bit for free once bases are announced.
    bool tagged = false;
};

/// Passive lossy channel: each photon survives independently with
/// probability eta. Never tags.
ChannelOutcome transmit_lossy(const PulseRecord& pulse, const ChannelConfig& config,
                              RandomStream& rng);

/// Photon-number-splitting attack: Eve captures each photon with probability
/// 1-eta and forwards the rest over her lossless channel, so the forwarded
/// statistics are indistinguishable from plain loss.
ChannelOutcome attack_pns(const PulseRecord& pulse, const ChannelConfig& config,
                          RandomStream& rng);

/// Splitting-and-resending: on multiphoton pulses Eve keeps one photon and
/// inserts a false one so Bob's photon count is conserved; single-photon
/// pulses take the attack_pns path.
ChannelOutcome attack_pnsr(const PulseRecord& pulse, const ChannelConfig& config,
                           RandomStream& rng);

/// Error-rate-level individual attack: per-photon capture with probability
/// 1-eta plus an independent bit flip with probability params.si_error_rate
/// on every forwarded photon.
ChannelOutcome attack_si(const PulseRecord& pulse, const ChannelConfig& config,
                         RandomStream& rng);

/// Dispatches on config.attack.
ChannelOutcome transmit(const PulseRecord& pulse, const ChannelConfig& config,
                        RandomStream& rng);

/// Eve's channel-loss redistribution strategy on the truncated photon-number
/// cascade.
///
/// p_eve[n] is the one-step-down probability that an n-photon pulse reaches
/// Bob with n-1 photons, n eta^{n-1} (1-eta); p_eve[1] reduces to 1-eta and
/// p_eve[2] to 2 eta (1-eta). The unapproximated cascade solutions
/// p_eve1_exact and p_eve2_exact keep the full exponentials. forward_dist[n]
/// is the unique per-photon solution f_n(i) = C(n,i) eta^i (1-eta)^{n-i};
/// residuals check it against the thinned Poisson target at both intensities
/// and do not depend on which intensity is used.
struct EveStrategySolution {
    double mu = 0.0;
    double mu_prime = 0.0;
    double eta = 0.0;
    unsigned n_max = 0;
    std::vector<double> p_eve;                      // index n, p_eve[0] = 0
    double p_eve1_exact = 0.0;                      // (e^{mu(1-eta)} - 1) / mu
    double p_eve1_first_order = 0.0;                // 1 - eta
    double p_eve2_exact = 0.0;                      // 2 eta (e^{mu(1-eta)} - 1) / mu
    double p_eve2_first_order = 0.0;                // 2 eta (1 - eta)
    std::vector<std::vector<double>> forward_dist;  // f[n][i], i <= n
    std::vector<double> residual_signal;            // thinning mismatch at mu
    std::vector<double> residual_decoy;             // thinning mismatch at mu_prime
    bool per_photon_solution_valid = false;         // all residuals < 1e-9
    bool naive_blocking_feasible = false;           // pure blocking passes the
                                                    // two-photon excess check
};

/// Throws std::domain_error for eta in {0, 1} (degenerate channel).
EveStrategySolution solve_blocking_distribution(double mu, double mu_prime, double eta,
                                                unsigned n_max);

/// Two-photon excess left by blocking alone: lhs = (mu^2/2) e^{-mu}
/// (1 - 2 eta (1-eta)), rhs = (eta mu)^2 / 2 e^{-eta mu}. infeasible when
/// lhs > rhs, i.e. Bob would see abnormally many two-photon pulses.
struct BlockingInfeasibilityReport {
    double lhs = 0.0;
    double rhs = 0.0;
    bool infeasible = false;
};

BlockingInfeasibilityReport check_blocking_infeasibility(double mu, double eta);

// --- State-vector kernel for the SI / coherent-multiphoton equivalence ---

/// Amplitude vector over (system (x) ancilla) basis states; dimension 4 for a
/// single photon, 16 for a photon pair. Norm stays 1 within 1e-12.
struct QubitJointState {
    std::vector<std::complex<double>> amp;

    double norm_sq() const;
};

using Mat4 = std::array<std::array<double, 4>, 4>;

/// Two-qubit unitary acting as identity on |0>|0> and mapping |1>|0> to
/// alpha |1>|0> + beta |0>|1> with beta = sqrt(1 - alpha^2); the orthogonal
/// completion rotates the (|0>|1>, |1>|0>) plane. Throws std::domain_error
/// for alpha outside [0, 1].
Mat4 si_unitary(double alpha);

/// Photon (x) fresh-ancilla product state for one BB84 preparation (dim 4).
QubitJointState si_initial_state(Basis basis, int bit);

/// Both photons of a pair prepared identically, each with its own fresh
/// ancilla (dim 16, index order photon1, ancilla1, photon2, ancilla2).
QubitJointState cmp_initial_state(Basis basis, int bit);

QubitJointState apply_si(const QubitJointState& state, double alpha);

/// Applies U (x) U to a 16-dimensional pair state. Throws
/// std::invalid_argument on dimension mismatch.
QubitJointState apply_cmp(const QubitJointState& state, double alpha);

/// Probability that measuring the photon in its preparation basis yields the
/// wrong bit, after the SI unitary.
double si_error_probability(Basis basis, int bit, double alpha);

/// Same marginal error probabilities for each photon of a pair after U (x) U.
std::array<double, 2> cmp_marginal_error_probabilities(Basis basis, int bit, double alpha);

}  // namespace qkd

#include "qkd/channel.hpp"

#include <cmath>
#include <stdexcept>

#include "qkd/stats.hpp"

namespace qkd {

void ChannelConfig::validate() const {
    if (!(eta > 0.0 && eta <= 1.0))
        throw std::invalid_argument("channel: eta must be in (0,1]");
    if (params.si_error_rate < 0.0 || params.si_error_rate > 0.5)
        throw std::invalid_argument("channel: si_error_rate must be in [0,0.5]");
}

ChannelOutcome transmit_lossy(const PulseRecord& pulse, const ChannelConfig& config,
                              RandomStream& rng) {
    ChannelOutcome out;
    out.pulse_id = pulse.id;
    for (const PhotonState& photon : encode_states(pulse)) {
        if (rng.bernoulli(config.eta)) out.forwarded.push_back(photon);
    }
    return out;
}

ChannelOutcome attack_pns(const PulseRecord& pulse, const ChannelConfig& config,
                          RandomStream& rng) {
    ChannelOutcome out;
    out.pulse_id = pulse.id;
    for (const PhotonState& photon : encode_states(pulse)) {
        if (rng.bernoulli(1.0 - config.eta)) {
            ++out.eve_captured;
        } else {
            out.forwarded.push_back(photon);
        }
    }
    out.tagged = out.eve_captured >= 1 && !out.forwarded.empty();
    return out;
}

ChannelOutcome attack_pnsr(const PulseRecord& pulse, const ChannelConfig& config,
                           RandomStream& rng) {
    if (pulse.photon_count < 2) return attack_pns(pulse, config, rng);

    ChannelOutcome out;
    out.pulse_id = pulse.id;
    out.forwarded = encode_states(pulse);

    // Eve keeps one photon and hands Bob a fake in its place, so the count he
    // resolves is conserved.
    PhotonState substitute{};
    switch (config.params.substitute_model) {
        case SubstituteModel::intercept_resend: {
            // She measures the captured photon in a random basis and resends
            // her outcome.
            Basis eve_basis = rng.next_bit() ? Basis::diagonal : Basis::rectilinear;
            std::uint8_t eve_bit = eve_basis == pulse.basis
                                       ? pulse.bit
                                       : static_cast<std::uint8_t>(rng.next_bit());
            substitute = PhotonState{eve_basis, eve_bit};
            break;
        }
        case SubstituteModel::random_state: {
            Basis b = rng.next_bit() ? Basis::diagonal : Basis::rectilinear;
            substitute = PhotonState{b, static_cast<std::uint8_t>(rng.next_bit())};
            break;
        }
    }
    out.forwarded.back() = substitute;
    out.eve_captured = 1;
    out.substituted = true;
    out.tagged = true;
    return out;
}

ChannelOutcome attack_si(const PulseRecord& pulse, const ChannelConfig& config,
                         RandomStream& rng) {
    ChannelOutcome out = attack_pns(pulse, config, rng);
    for (PhotonState& photon : out.forwarded) {
        if (config.params.si_error_rate > 0.0 && rng.bernoulli(config.params.si_error_rate))
            photon.bit ^= 1u;
    }
    return out;
}

ChannelOutcome transmit(const PulseRecord& pulse, const ChannelConfig& config,
                        RandomStream& rng) {
    switch (config.attack) {
        case AttackKind::none:
            return transmit_lossy(pulse, config, rng);
        case AttackKind::pns:
            return attack_pns(pulse, config, rng);
        case AttackKind::pnsr:
            return attack_pnsr(pulse, config, rng);
        case AttackKind::si:
        case AttackKind::cmp:
            return attack_si(pulse, config, rng);
    }
    throw std::logic_error("transmit: unknown attack kind");
}

namespace {

double binomial_coefficient(unsigned n, unsigned k) {
    return std::exp(std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0));
}

// Thinning residual at one class: sum_{j>=n} P(j; mu) C(j,n) eta^n
// (1-eta)^{j-n} - P(n; eta mu). Summed far past n_max so only genuine
// mismatch survives, not truncation.
double thinning_residual(unsigned n, double mu, double eta) {
    constexpr unsigned kSumLimit = 64;
    double forwarded = 0.0;
    for (unsigned j = n; j <= kSumLimit; ++j) {
        forwarded += poisson_pmf(j, mu) * binomial_coefficient(j, n) * std::pow(eta, n) *
                     std::pow(1.0 - eta, j - n);
    }
    return forwarded - poisson_pmf(n, eta * mu);
}

}  // namespace

EveStrategySolution solve_blocking_distribution(double mu, double mu_prime, double eta,
                                                unsigned n_max) {
    if (!(eta > 0.0 && eta < 1.0))
        throw std::domain_error("solve_blocking_distribution: eta must be in (0,1)");
    if (!(mu > 0.0) || !(mu_prime > 0.0))
        throw std::invalid_argument("solve_blocking_distribution: intensities must be > 0");

    EveStrategySolution sol;
    sol.mu = mu;
    sol.mu_prime = mu_prime;
    sol.eta = eta;
    sol.n_max = n_max;

    // Cascade solution, defining ratio form; equals (e^{mu(1-eta)} - 1)/mu.
    sol.p_eve1_exact = (std::exp(-eta * mu) - std::exp(-mu)) / (mu * std::exp(-mu));
    sol.p_eve1_first_order = 1.0 - eta;
    // Next cascade step with the first-order single-photon value plugged in.
    sol.p_eve2_exact = 2.0 * eta * (std::exp(mu * (1.0 - eta)) - 1.0) / mu;
    sol.p_eve2_first_order = 2.0 * eta * (1.0 - eta);

    sol.p_eve.assign(n_max + 1, 0.0);
    sol.forward_dist.assign(n_max + 1, {});
    for (unsigned n = 0; n <= n_max; ++n) {
        sol.forward_dist[n].assign(n + 1, 0.0);
        for (unsigned i = 0; i <= n; ++i) {
            sol.forward_dist[n][i] = binomial_coefficient(n, i) * std::pow(eta, i) *
                                     std::pow(1.0 - eta, n - i);
        }
        // One-step-down probability: n photons in, n-1 out.
        if (n >= 1) sol.p_eve[n] = sol.forward_dist[n][n - 1];
    }

    sol.residual_signal.resize(n_max + 1);
    sol.residual_decoy.resize(n_max + 1);
    sol.per_photon_solution_valid = true;
    for (unsigned n = 0; n <= n_max; ++n) {
        sol.residual_signal[n] = thinning_residual(n, mu, eta);
        sol.residual_decoy[n] = thinning_residual(n, mu_prime, eta);
        if (std::abs(sol.residual_signal[n]) >= 1e-9 || std::abs(sol.residual_decoy[n]) >= 1e-9)
            sol.per_photon_solution_valid = false;
    }

    sol.naive_blocking_feasible = !check_blocking_infeasibility(mu, eta).infeasible;
    return sol;
}

BlockingInfeasibilityReport check_blocking_infeasibility(double mu, double eta) {
    if (!(mu > 0.0)) throw std::invalid_argument("check_blocking_infeasibility: mu must be > 0");
    if (!(eta > 0.0 && eta < 1.0))
        throw std::invalid_argument("check_blocking_infeasibility: eta must be in (0,1)");
    BlockingInfeasibilityReport report;
    double p_eve2 = 2.0 * (1.0 - eta) * eta;
    report.lhs = mu * mu / 2.0 * std::exp(-mu) * (1.0 - p_eve2);
    report.rhs = (eta * mu) * (eta * mu) / 2.0 * std::exp(-eta * mu);
    report.infeasible = report.lhs > report.rhs;
    return report;
}

// --- state-vector kernel ---

double QubitJointState::norm_sq() const {
    double s = 0.0;
    for (const auto& a : amp) s += std::norm(a);
    return s;
}

Mat4 si_unitary(double alpha) {
    if (!(alpha >= 0.0 && alpha <= 1.0))
        throw std::domain_error("si_unitary: alpha must be in [0,1]");
    double beta = std::sqrt(1.0 - alpha * alpha);
    // Basis index = 2 * system_bit + ancilla_bit. Acts as identity on |00>
    // and |11>, rotates the (|01>, |10>) plane: |10> -> alpha|10> + beta|01>,
    // |01> -> alpha|01> - beta|10>.
    Mat4 u{};
    u[0][0] = 1.0;
    u[3][3] = 1.0;
    u[2][2] = alpha;
    u[1][2] = beta;
    u[1][1] = alpha;
    u[2][1] = -beta;
    return u;
}

namespace {

// Column vector of a BB84 state in the computational basis.
std::array<double, 2> bb84_vector(Basis basis, int bit) {
    constexpr double inv_sqrt2 = 0.70710678118654752440;
    if (basis == Basis::rectilinear)
        return bit == 0 ? std::array<double, 2>{1.0, 0.0} : std::array<double, 2>{0.0, 1.0};
    return bit == 0 ? std::array<double, 2>{inv_sqrt2, inv_sqrt2}
                    : std::array<double, 2>{inv_sqrt2, -inv_sqrt2};
}

// Applies the 4x4 unitary to the (system, ancilla) index pair at bit
// positions (system_shift+1, system_shift) of the state index.
QubitJointState apply_on_pair(const QubitJointState& state, const Mat4& u,
                              unsigned system_shift) {
    QubitJointState out;
    out.amp.assign(state.amp.size(), {0.0, 0.0});
    std::size_t pair_mask = 3u << system_shift;
    for (std::size_t idx = 0; idx < state.amp.size(); ++idx) {
        if (state.amp[idx] == std::complex<double>{}) continue;
        std::size_t pair = (idx & pair_mask) >> system_shift;
        std::size_t rest = idx & ~pair_mask;
        for (std::size_t row = 0; row < 4; ++row) {
            if (u[row][pair] == 0.0) continue;
            out.amp[rest | (row << system_shift)] += u[row][pair] * state.amp[idx];
        }
    }
    return out;
}

// P(measuring the photon at system_shift in `basis` gives the wrong bit).
double marginal_error(const QubitJointState& state, Basis basis, int bit,
                      unsigned system_shift) {
    auto wrong = bb84_vector(basis, 1 - bit);
    std::size_t system_bit = 1u << (system_shift + 1);
    double p = 0.0;
    // Project the system qubit on the wrong outcome, keep everything else.
    for (std::size_t rest = 0; rest < state.amp.size(); ++rest) {
        if (rest & system_bit) continue;  // enumerate indices with system=0
        std::complex<double> amp = wrong[0] * state.amp[rest] +
                                   wrong[1] * state.amp[rest | system_bit];
        p += std::norm(amp);
    }
    return p;
}

}  // namespace

QubitJointState si_initial_state(Basis basis, int bit) {
    auto v = bb84_vector(basis, bit);
    QubitJointState state;
    state.amp.assign(4, {0.0, 0.0});
    state.amp[0] = v[0];  // |a=0, e=0>
    state.amp[2] = v[1];  // |a=1, e=0>
    return state;
}

QubitJointState cmp_initial_state(Basis basis, int bit) {
    auto single = si_initial_state(basis, bit);
    QubitJointState state;
    state.amp.assign(16, {0.0, 0.0});
    for (std::size_t i = 0; i < 4; ++i)
        for (std::size_t j = 0; j < 4; ++j) state.amp[i * 4 + j] = single.amp[i] * single.amp[j];
    return state;
}

QubitJointState apply_si(const QubitJointState& state, double alpha) {
    if (state.amp.size() != 4) throw std::invalid_argument("apply_si: need a 4-dim state");
    return apply_on_pair(state, si_unitary(alpha), 0);
}

QubitJointState apply_cmp(const QubitJointState& state, double alpha) {
    if (state.amp.size() != 16) throw std::invalid_argument("apply_cmp: need a 16-dim state");
    Mat4 u = si_unitary(alpha);
    return apply_on_pair(apply_on_pair(state, u, 2), u, 0);
}

double si_error_probability(Basis basis, int bit, double alpha) {
    QubitJointState out = apply_si(si_initial_state(basis, bit), alpha);
    return marginal_error(out, basis, bit, 0);
}

std::array<double, 2> cmp_marginal_error_probabilities(Basis basis, int bit, double alpha) {
    QubitJointState out = apply_cmp(cmp_initial_state(basis, bit), alpha);
    return {marginal_error(out, basis, bit, 2), marginal_error(out, basis, bit, 0)};
}

}  // namespace qkd

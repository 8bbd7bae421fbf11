#pragma once

namespace qkd {

/// Bob's information per sifted bit, 1 - h(e). Domain e in [0, 0.5].
double info_ab(double e);

/// Eve's optimal symmetric-individual-attack information at QBER e:
/// 1 - h((1 + 2 sqrt(e - e^2)) / 2). Domain e in [0, 0.5].
double si_info(double e);

/// Eve's total information (1 - mu) si_info(e) + mu: every tagged pulse
/// concedes the full bit and p_tagged is bounded by mu. Domain mu in [0, 1).
double info_ae(double e, double mu);

struct ThresholdResult {
    double threshold = 0.0;
    bool insecure_everywhere = false;  // info_ab <= info_ae over the whole bracket
};

/// QBER e* where info_ab crosses info_ae for the given mu, solved by
/// bisection on [1e-6, 0.5 - 1e-6]; a final key is possible iff e < e*.
ThresholdResult security_threshold(double mu, double tol = 1e-6);

/// Asymptotic secure-key fraction (1 - delta) - h(e) - (1 - delta)
/// h(e / (1 - delta)). Negative values are returned as-is (no secure key);
/// when e / (1 - delta) exceeds 0.5 the last term is floored at its maximum,
/// giving the nonpositive -h(e). Throws std::domain_error for delta >= 1.
double gllp_rate(double e, double delta);

/// Tagged-fraction bound mu (1 - eta) <= mu, independent of the decoy
/// intensity and saturating as eta -> 0.
double delta_bound(double mu, double eta);

/// Delta = p_M / p_D, clamped to [0, 1]. Throws std::domain_error for
/// p_d <= 0 or p_m < 0.
double delta_from_counts(double p_m, double p_d);

/// Conventional decoy-protocol bound mu e^{-mu} / (mu' e^{-mu'}), for
/// comparison with delta_bound.
double decoy_delta_bound(double mu, double mu_prime);

/// First-order probability mu eta / 2 that a detected pulse is multiphoton.
double multiphoton_detect_prob(double mu, double eta);

struct SecuritySummary {
    double qber = 0.0;
    double mu = 0.0;
    double eta = 0.0;
    double i_ab = 0.0;
    double h_si = 0.0;
    double i_ae = 0.0;
    double delta_bound = 0.0;        // mu (1 - eta)
    double delta_decoy_bound = 0.0;  // decoy-protocol comparison value
    double gllp_rate = 0.0;          // evaluated at delta_bound
    double threshold_qber = 0.0;
    bool insecure_everywhere = false;
    bool secure = false;  // i_ab > i_ae
};

/// Bundles the closed forms for one operating point. QBER above 0.5 is
/// treated as total information loss (i_ab = 0, i_ae = 1).
SecuritySummary make_security_summary(double qber, double mu, double eta, double mu_prime);

}  // namespace qkd

#include "qkd/security.hpp"

#include <cmath>
#include <stdexcept>

#include "qkd/stats.hpp"

namespace qkd {

double info_ab(double e) {
    if (!(e >= 0.0 && e <= 0.5)) throw std::domain_error("info_ab: e must be in [0,0.5]");
    return 1.0 - binary_entropy(e);
}

double si_info(double e) {
    if (!(e >= 0.0 && e <= 0.5)) throw std::domain_error("si_info: e must be in [0,0.5]");
    return 1.0 - binary_entropy((1.0 + 2.0 * std::sqrt(e - e * e)) / 2.0);
}

double info_ae(double e, double mu) {
    if (!(mu >= 0.0 && mu <= 1.0)) throw std::domain_error("info_ae: mu must be in [0,1]");
    return (1.0 - mu) * si_info(e) + mu;
}

ThresholdResult security_threshold(double mu, double tol) {
    if (!(mu > 0.0 && mu < 1.0))
        throw std::domain_error("security_threshold: mu must be in (0,1)");
    if (!(tol > 0.0)) throw std::invalid_argument("security_threshold: tol must be > 0");
    const double lo = 1e-6;
    const double hi = 0.5 - 1e-6;
    auto gap = [mu](double e) { return info_ab(e) - info_ae(e, mu); };
    ThresholdResult result;
    if (gap(lo) <= 0.0) {
        result.insecure_everywhere = true;
        result.threshold = 0.0;
        return result;
    }
    result.threshold = bisect_root(gap, lo, hi, tol);
    return result;
}

double gllp_rate(double e, double delta) {
    if (!(delta >= 0.0 && delta < 1.0)) throw std::domain_error("gllp_rate: delta must be in [0,1)");
    if (!(e >= 0.0 && e <= 1.0)) throw std::domain_error("gllp_rate: e must be in [0,1]");
    double survivors = 1.0 - delta;
    double arg = e / survivors;
    // Past arg = 0.5 the privacy-amplification term is floored at its
    // maximum, leaving the nonpositive -h(e).
    double pa_term = arg > 0.5 ? survivors : survivors * binary_entropy(arg);
    return survivors - binary_entropy(e) - pa_term;
}

double delta_bound(double mu, double eta) {
    if (!(eta > 0.0 && eta <= 1.0)) throw std::domain_error("delta_bound: eta must be in (0,1]");
    if (!(mu >= 0.0)) throw std::domain_error("delta_bound: mu must be >= 0");
    return mu * (1.0 - eta);
}

double delta_from_counts(double p_m, double p_d) {
    if (!(p_d > 0.0 && p_d <= 1.0)) throw std::domain_error("delta_from_counts: p_d must be in (0,1]");
    if (!(p_m >= 0.0)) throw std::domain_error("delta_from_counts: p_m must be >= 0");
    double ratio = p_m / p_d;
    return ratio > 1.0 ? 1.0 : ratio;
}

double decoy_delta_bound(double mu, double mu_prime) {
    if (!(mu > 0.0) || !(mu_prime > 0.0))
        throw std::domain_error("decoy_delta_bound: intensities must be > 0");
    return (mu * std::exp(-mu)) / (mu_prime * std::exp(-mu_prime));
}

double multiphoton_detect_prob(double mu, double eta) {
    if (!(mu >= 0.0) || !(eta >= 0.0 && eta <= 1.0))
        throw std::domain_error("multiphoton_detect_prob: invalid parameters");
    return mu * eta / 2.0;
}

SecuritySummary make_security_summary(double qber, double mu, double eta, double mu_prime) {
    SecuritySummary s;
    s.qber = qber;
    s.mu = mu;
    s.eta = eta;
    if (qber > 0.5) {
        s.i_ab = 0.0;
        s.h_si = 1.0;
        s.i_ae = 1.0;
    } else {
        s.i_ab = info_ab(qber);
        s.h_si = si_info(qber);
        s.i_ae = info_ae(qber, mu);
    }
    s.delta_bound = delta_bound(mu, eta);
    s.delta_decoy_bound = decoy_delta_bound(mu, mu_prime);
    s.gllp_rate = gllp_rate(std::min(qber, 1.0), s.delta_bound);
    ThresholdResult t = security_threshold(mu);
    s.threshold_qber = t.threshold;
    s.insecure_everywhere = t.insecure_everywhere;
    s.secure = s.i_ab > s.i_ae;
    return s;
}

}  // namespace qkd

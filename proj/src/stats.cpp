#include "qkd/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <boost/math/special_functions/gamma.hpp>

namespace qkd {

double poisson_pmf(unsigned n, double mean) {
    if (!(mean >= 0.0)) throw std::domain_error("poisson_pmf: mean must be >= 0");
    if (mean == 0.0) return n == 0 ? 1.0 : 0.0;
    return std::exp(static_cast<double>(n) * std::log(mean) - mean -
                    std::lgamma(static_cast<double>(n) + 1.0));
}

std::vector<double> poisson_pmf_classes(double mean, std::size_t n_classes) {
    if (n_classes < 2) throw std::invalid_argument("poisson_pmf_classes: need >= 2 classes");
    std::vector<double> probs(n_classes, 0.0);
    double head = 0.0;
    for (std::size_t n = 0; n + 1 < n_classes; ++n) {
        probs[n] = poisson_pmf(static_cast<unsigned>(n), mean);
        head += probs[n];
    }
    probs[n_classes - 1] = std::max(0.0, 1.0 - head);
    return probs;
}

double binary_entropy(double x) {
    if (!(x >= 0.0 && x <= 1.0)) throw std::domain_error("binary_entropy: x must be in [0,1]");
    if (x == 0.0 || x == 1.0) return 0.0;
    // Canonical term order keeps h(x) == h(1-x) bit-exact whenever the pair
    // itself is exactly representable.
    double y = 1.0 - x;
    double lo = x < y ? x : y;
    double hi = x < y ? y : x;
    return -lo * std::log2(lo) - hi * std::log2(hi);
}

double multiphoton_given_nonempty(double mu) {
    if (!(mu > 0.0)) throw std::domain_error("multiphoton_given_nonempty: mu must be > 0");
    // 1 - e^{-mu}(1 + mu) over 1 - e^{-mu}, kept in expm1 form for small mu.
    double nonempty = -std::expm1(-mu);
    double multi = nonempty - mu * std::exp(-mu);
    return multi / nonempty;
}

GofResult chi_square_gof(const CountHistogram& observed, std::span<const double> expected,
                         double significance, double min_expected) {
    if (observed.counts.size() != expected.size())
        throw std::invalid_argument("chi_square_gof: class count mismatch");
    if (observed.total < 100)
        throw std::invalid_argument("chi_square_gof: need total >= 100 events");
    double psum = std::accumulate(expected.begin(), expected.end(), 0.0);
    if (std::abs(psum - 1.0) > 1e-9)
        throw std::invalid_argument("chi_square_gof: expected probabilities must sum to 1");

    double total = static_cast<double>(observed.total);
    for (std::size_t i = 0; i < expected.size(); ++i) {
        if (expected[i] <= 0.0 && observed.counts[i] > 0)
            throw std::domain_error("chi_square_gof: zero-probability class observed");
    }

    // Pool sparse classes (expected count < min_expected) into one bucket so
    // the chi-square sampling distribution stays valid; the bucket joins the
    // smallest well-filled class if it is itself still sparse. The pooling
    // depends only on expectation values, not class order.
    struct Cell {
        double expected_count;
        double observed_count;
    };
    std::vector<Cell> cells;
    Cell sparse{0.0, 0.0};
    for (std::size_t i = 0; i < expected.size(); ++i) {
        double ec = expected[i] * total;
        double oc = static_cast<double>(observed.counts[i]);
        if (ec < min_expected) {
            sparse.expected_count += ec;
            sparse.observed_count += oc;
        } else {
            cells.push_back({ec, oc});
        }
    }
    if (sparse.expected_count > 0.0 || sparse.observed_count > 0.0) {
        if (sparse.expected_count >= min_expected || cells.empty()) {
            cells.push_back(sparse);
        } else {
            auto smallest = std::min_element(
                cells.begin(), cells.end(),
                [](const Cell& a, const Cell& b) { return a.expected_count < b.expected_count; });
            smallest->expected_count += sparse.expected_count;
            smallest->observed_count += sparse.observed_count;
        }
    }

    GofResult result;
    result.significance = significance;
    if (cells.size() < 2) {
        // Everything pooled into one bucket: nothing to test against.
        result.statistic = 0.0;
        result.p_value = 1.0;
        result.dof = 0;
        result.pass = true;
        return result;
    }

    double stat = 0.0;
    for (const Cell& c : cells) {
        double diff = c.observed_count - c.expected_count;
        stat += diff * diff / c.expected_count;
    }
    result.statistic = stat;
    result.dof = static_cast<int>(cells.size()) - 1;
    result.p_value = boost::math::gamma_q(result.dof / 2.0, stat / 2.0);
    result.pass = result.p_value >= significance;
    return result;
}

}  // namespace qkd

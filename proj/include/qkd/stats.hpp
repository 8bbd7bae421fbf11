#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

namespace qkd {

/// Histogram over photon-number classes 0..k-2 plus an overflow tail class
/// at index k-1. Invariant: sum(counts) == total.
struct CountHistogram {
    std::vector<std::uint64_t> counts;
    std::uint64_t total = 0;

    static CountHistogram with_classes(std::size_t n_classes) {
        CountHistogram h;
        h.counts.assign(n_classes, 0);
        return h;
    }

    /// Adds one event; values at or past the last class land in the tail.
    void add(std::uint64_t value) {
        std::size_t idx = value < counts.size() ? static_cast<std::size_t>(value)
                                                : counts.size() - 1;
        ++counts[idx];
        ++total;
    }
};

struct GofResult {
    double statistic = 0.0;
    double p_value = 1.0;
    int dof = 0;
    double significance = 0.01;
    bool pass = true;  // p_value >= significance
};

/// Poisson pmf mu^n e^{-mu} / n!. Throws std::domain_error for mean < 0.
double poisson_pmf(unsigned n, double mean);

/// Class probabilities [P(0), .., P(k-2), tail mass] summing to exactly 1.
std::vector<double> poisson_pmf_classes(double mean, std::size_t n_classes);

/// h(x) = -x log2 x - (1-x) log2(1-x), with h(0) = h(1) = 0 by continuity.
/// Throws std::domain_error outside [0, 1].
double binary_entropy(double x);

/// P(n > 1 | n > 0) for a Poisson source of the given mean; ~mu/2 for small mu.
/// Throws std::domain_error for mu <= 0.
double multiphoton_given_nonempty(double mu);

/// Pearson goodness-of-fit of an observed histogram against expected class
/// probabilities (must sum to 1 within 1e-9; total >= 100).
///
/// Classes whose expected count falls below min_expected are pooled into a
/// single sparse bucket before the statistic is computed, so the test stays
/// calibrated when tail classes carry almost no mass. Throws
/// std::domain_error when a class has zero expected probability but a
/// nonzero observed count.
GofResult chi_square_gof(const CountHistogram& observed, std::span<const double> expected,
                         double significance = 0.01, double min_expected = 5.0);

/// Bisection root finder. f(lo) and f(hi) must have opposite signs
/// (else std::invalid_argument); returns the midpoint of a bracket of
/// width <= tol containing a sign change.
template <typename F>
double bisect_root(F f, double lo, double hi, double tol) {
    if (!(tol > 0.0)) throw std::invalid_argument("bisect_root: tol must be > 0");
    double flo = f(lo);
    double fhi = f(hi);
    if (flo == 0.0) return lo;
    if (fhi == 0.0) return hi;
    if ((flo > 0.0) == (fhi > 0.0))
        throw std::invalid_argument("bisect_root: no sign change in bracket");
    while (hi - lo > tol) {
        double mid = 0.5 * (lo + hi);
        double fmid = f(mid);
        if (fmid == 0.0) return mid;
        if ((fmid > 0.0) == (flo > 0.0)) {
            lo = mid;
            flo = fmid;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

}  // namespace qkd

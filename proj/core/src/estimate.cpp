#include "ajsim/estimate.hpp"

#include <algorithm>
#include <cmath>

namespace ajsim {

EstimateWithCI estimate_from_moments(double mean, double variance, std::size_t n, std::size_t n_excluded) {
    EstimateWithCI e;
    e.point = mean;
    e.n_paths = n;
    e.n_excluded = n_excluded;
    e.std_error = n > 0 ? std::sqrt(std::max(variance, 0.0) / static_cast<double>(n)) : 0.0;
    e.ci_low = mean - kZ95 * e.std_error;
    e.ci_high = mean + kZ95 * e.std_error;
    return e;
}

EstimateWithCI estimate_mean(std::span<const double> samples, std::size_t n_excluded) {
    const std::size_t n = samples.size();
    if (n == 0) return estimate_from_moments(0.0, 0.0, 0, n_excluded);
    // Summing offsets from the first sample keeps a constant sample exact.
    const double shift = samples.front();
    CompensatedSum sum;
    for (double x : samples) sum.add(x - shift);
    const double mean = shift + sum.value() / static_cast<double>(n);
    CompensatedSum sq;
    for (double x : samples) {
        const double d = x - mean;
        sq.add(d * d);
    }
    const double var = n > 1 ? sq.value() / static_cast<double>(n - 1) : 0.0;
    return estimate_from_moments(mean, var, n, n_excluded);
}

EstimateWithCI estimate_proportion(std::size_t successes, std::size_t n, std::size_t n_excluded) {
    EstimateWithCI e;
    e.n_paths = n;
    e.n_excluded = n_excluded;
    if (n == 0) return e;
    const double nn = static_cast<double>(n);
    const double p = static_cast<double>(successes) / nn;
    e.point = p;
    e.std_error = std::sqrt(p * (1.0 - p) / nn);
    if (successes < 10 || n - successes < 10) {
        const double z2 = kZ95 * kZ95;
        const double denom = 1.0 + z2 / nn;
        const double centre = (p + z2 / (2.0 * nn)) / denom;
        const double half = kZ95 * std::sqrt(p * (1.0 - p) / nn + z2 / (4.0 * nn * nn)) / denom;
        e.ci_low = std::max(0.0, std::min(p, centre - half));
        e.ci_high = std::min(1.0, std::max(p, centre + half));
    } else {
        e.ci_low = std::max(0.0, p - kZ95 * e.std_error);
        e.ci_high = std::min(1.0, p + kZ95 * e.std_error);
    }
    return e;
}

}  // namespace ajsim

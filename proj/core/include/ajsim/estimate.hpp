#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>

namespace ajsim {

/// Neumaier-compensated running sum. Summation order is the caller's responsibility;
/// all reductions in the library run in path-index order.
class CompensatedSum {
public:
    void add(double x) {
        const double t = sum_ + x;
        if (std::fabs(sum_) >= std::fabs(x)) {
            comp_ += (sum_ - t) + x;
        } else {
            comp_ += (x - t) + sum_;
        }
        sum_ = t;
    }
    CompensatedSum& operator+=(double x) {
        add(x);
        return *this;
    }
    void merge(const CompensatedSum& other) {
        add(other.sum_);
        add(other.comp_);
    }
    double value() const { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

/// Raised when an estimator has no usable paths left (every path overflowed).
class RuntimeAbort : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// z quantile of the two-sided 95% normal interval.
inline constexpr double kZ95 = 1.959963984540054;

/// Monte Carlo estimate with 95% confidence interval.
struct EstimateWithCI {
    double point = 0.0;
    double std_error = 0.0;
    double ci_low = 0.0;
    double ci_high = 0.0;
    std::size_t n_paths = 0;
    /// Paths aborted by overflow.
    std::size_t n_excluded = 0;

    friend bool operator==(const EstimateWithCI&, const EstimateWithCI&) = default;
};

/// Sample mean with standard error sqrt(s^2 / n) and normal interval.
EstimateWithCI estimate_mean(std::span<const double> samples, std::size_t n_excluded = 0);

/// Estimate from a sample mean and unbiased sample variance over n samples.
EstimateWithCI estimate_from_moments(double mean, double variance, std::size_t n, std::size_t n_excluded = 0);

/// Proportion successes / n with binomial standard error; the interval is the Wilson score
/// interval when fewer than 10 successes or failures were observed, else the normal interval.
EstimateWithCI estimate_proportion(std::size_t successes, std::size_t n, std::size_t n_excluded = 0);

}  // namespace ajsim

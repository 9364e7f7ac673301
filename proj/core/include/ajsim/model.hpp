#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace ajsim {

/// Raised when a coefficient is evaluated outside the region where it is defined.
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Below this magnitude the reciprocal drift term a_{-1}/y is treated as singular.
inline constexpr double kSingularityFloor = 1e-12;

/// Absolute tolerance used when deciding whether an exponent relation sits on a boundary.
inline constexpr double kRegimeTolerance = 1e-12;

/// Coefficients of the mean-reverting short-rate model with Poisson jumps
///
///   dy = (a_{-1}/y - a0 + a1 y - a2 y^gamma) dt + sigma y^rho dB + delta y(t-) dN
///
/// with N a Poisson process of intensity lambda.
struct ModelParams {
    double a_neg1 = 0.0;
    double a0 = 0.0;
    double a1 = 0.0;
    double a2 = 0.0;
    double gamma = 1.5;
    double sigma = 0.0;
    double rho = 1.2;
    double delta = 0.0;
    double lambda = 0.0;
    double y0 = 1.0;

    friend bool operator==(const ModelParams&, const ModelParams&) = default;
};

/// One violated invariant, addressed by a dotted field path such as "model.gamma".
struct ValidationIssue {
    std::string field;
    std::string message;

    friend bool operator==(const ValidationIssue&, const ValidationIssue&) = default;
};

/// Every violated invariant of `params`; empty when valid. `prefix` is prepended to field paths.
std::vector<ValidationIssue> validate(const ModelParams& params, const std::string& prefix = "model");

/// Throws std::invalid_argument listing all violated invariants.
void require_valid(const ModelParams& params);

/// sign(y) |y|^p, the odd extension of y^p to negative arguments.
double pow_signed(double y, double p);

/// a_{-1}/y - a0 + a1 y - a2 sign(y)|y|^gamma. Throws DomainError when |y| is below
/// kSingularityFloor and a_{-1} > 0.
double drift(const ModelParams& params, double y);

/// Drift with the reciprocal argument replaced by sign(y) * kSingularityFloor when |y| is
/// below the floor. `clamped` reports whether the substitution happened.
double drift_clamped(const ModelParams& params, double y, bool& clamped);

/// sigma |y|^rho.
double diffusion(const ModelParams& params, double y);

/// delta y: the state change caused by a single jump.
double jump(const ModelParams& params, double y);

enum class MomentBranch { none, strict, boundary };

const char* to_string(MomentBranch branch);

/// Which moment and asymptotic bounds of the model hold for a parameter set.
struct RegimeReport {
    double p = 2.0;
    /// p-th moment bound: 2rho < gamma + 1 (strict), or 2rho = gamma + 1 with a2 > (p-1) sigma^2 / 2.
    bool moment_ok = false;
    MomentBranch moment_branch = MomentBranch::none;
    /// Second-moment corollary as stated separately: 1 < rho <= (gamma+1)/2, or
    /// rho = (gamma+1)/2 with 2 a2 > sigma^2.
    bool second_moment_corollary_ok = false;
    /// Inverse first moment: 2rho <= gamma + 1 and gamma <= 2.
    bool inverse_moment_ok = false;
    /// liminf log y / log t >= -1: 1 < rho <= 1.5 and 1 < gamma <= 2.
    bool pathwise_lower_ok = false;
    /// limsup log y / log t <= 1: 1 < rho < (gamma+1)/2 and 1 < gamma <= 2.
    bool pathwise_upper_ok = false;
    /// Time-averaged E(y^-2 + y^2) bound: rho > 1.5.
    bool time_avg_ok = false;

    friend bool operator==(const RegimeReport&, const RegimeReport&) = default;
};

/// Evaluates the regime inequalities for moment order `p` (p >= 2).
RegimeReport regime_check(const ModelParams& params, double p = 2.0);

/// Inverse-moment bound E y^{-q} for general q >= 1: 2rho <= gamma + 1 and gamma <= q + 1.
bool inverse_moment_ok(const ModelParams& params, double q);

/// Human-readable descriptions of every regime hypothesis that fails.
std::vector<std::string> regime_warnings(const RegimeReport& report, const ModelParams& params);

/// V(y) = y^theta - 1 - theta log y. Requires 0 < theta < 1 and y > 0.
double lyapunov(double theta, double y);

/// LV(y) + lambda (V((1+delta) y) - V(y)) with LV = V' f + V'' g^2 / 2, evaluated from its
/// expansion in powers of y. Requires 0 < theta < 1 and y > 0.
double generator_with_jump(const ModelParams& params, double theta, double y);

struct GeneratorScan {
    std::vector<double> y;
    std::vector<double> values;
    double supremum = 0.0;
    double argmax = 0.0;
    bool finite = false;
};

/// Evaluates generator_with_jump on `points` log-spaced nodes over [lo, hi] and records
/// the grid supremum (an empirical bound for the generator).
GeneratorScan generator_supremum(const ModelParams& params, double theta, double lo = 1e-6,
                                 double hi = 1e6, std::size_t points = 10000);

}  // namespace ajsim

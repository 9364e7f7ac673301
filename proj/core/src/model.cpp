#include "ajsim/model.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace ajsim {

namespace {

bool nonneg(double v) { return std::isfinite(v) && v >= 0.0; }

void check_theta(double theta) {
    if (!(theta > 0.0 && theta < 1.0)) {
        throw DomainError("lyapunov exponent theta must lie in (0, 1)");
    }
}

}  // namespace

std::vector<ValidationIssue> validate(const ModelParams& params, const std::string& prefix) {
    std::vector<ValidationIssue> issues;
    auto field = [&](const char* name) { return prefix.empty() ? std::string(name) : prefix + "." + name; };
    auto need_nonneg = [&](const char* name, double v) {
        if (!nonneg(v)) issues.push_back({field(name), std::string(name) + " must be finite and >= 0"});
    };
    need_nonneg("a_neg1", params.a_neg1);
    need_nonneg("a0", params.a0);
    need_nonneg("a1", params.a1);
    need_nonneg("a2", params.a2);
    if (!(std::isfinite(params.gamma) && params.gamma > 1.0)) {
        issues.push_back({field("gamma"), "gamma must be > 1 (superlinear mean reversion)"});
    }
    need_nonneg("sigma", params.sigma);
    if (!(std::isfinite(params.rho) && params.rho > 1.0)) {
        issues.push_back({field("rho"), "rho must be > 1 (superlinear diffusion exponent)"});
    }
    need_nonneg("delta", params.delta);
    need_nonneg("lambda", params.lambda);
    if (!(std::isfinite(params.y0) && params.y0 > 0.0)) {
        issues.push_back({field("y0"), "initial value y0 must be > 0"});
    }
    return issues;
}

void require_valid(const ModelParams& params) {
    auto issues = validate(params);
    if (issues.empty()) return;
    std::ostringstream msg;
    msg << "invalid model parameters:";
    for (const auto& issue : issues) msg << ' ' << issue.field << ": " << issue.message << ';';
    throw std::invalid_argument(msg.str());
}

double pow_signed(double y, double p) {
    const double mag = std::pow(std::fabs(y), p);
    return y < 0.0 ? -mag : mag;
}

double drift(const ModelParams& params, double y) {
    double recip = 0.0;
    if (params.a_neg1 > 0.0) {
        if (std::fabs(y) < kSingularityFloor) {
            throw DomainError("drift evaluated at |y| below the singularity floor");
        }
        recip = params.a_neg1 / y;
    }
    return recip - params.a0 + params.a1 * y - params.a2 * pow_signed(y, params.gamma);
}

double drift_clamped(const ModelParams& params, double y, bool& clamped) {
    clamped = false;
    double recip = 0.0;
    if (params.a_neg1 > 0.0) {
        double arg = y;
        if (std::fabs(y) < kSingularityFloor) {
            arg = std::signbit(y) ? -kSingularityFloor : kSingularityFloor;
            clamped = true;
        }
        recip = params.a_neg1 / arg;
    }
    return recip - params.a0 + params.a1 * y - params.a2 * pow_signed(y, params.gamma);
}

double diffusion(const ModelParams& params, double y) {
    return params.sigma * std::pow(std::fabs(y), params.rho);
}

double jump(const ModelParams& params, double y) { return params.delta * y; }

const char* to_string(MomentBranch branch) {
    switch (branch) {
        case MomentBranch::strict: return "strict";
        case MomentBranch::boundary: return "boundary";
        case MomentBranch::none: break;
    }
    return "none";
}

RegimeReport regime_check(const ModelParams& params, double p) {
    RegimeReport r;
    r.p = p;
    const double two_rho = 2.0 * params.rho;
    const double gp1 = params.gamma + 1.0;
    const double gap = two_rho - gp1;
    const bool strict = gap < -kRegimeTolerance;
    const bool boundary = std::fabs(gap) <= kRegimeTolerance;
    const double s2 = params.sigma * params.sigma;

    if (strict) {
        r.moment_ok = true;
        r.moment_branch = MomentBranch::strict;
    } else if (boundary && params.a2 > (p - 1.0) * s2 / 2.0) {
        r.moment_ok = true;
        r.moment_branch = MomentBranch::boundary;
    }

    r.second_moment_corollary_ok = params.rho > 1.0 && (strict || boundary);
    if (boundary && !(2.0 * params.a2 > s2)) {
        // The boundary branch of the corollary carries the extra coefficient condition.
        r.second_moment_corollary_ok = false;
    }

    r.inverse_moment_ok = inverse_moment_ok(params, 1.0);
    const bool gamma_le_2 = params.gamma > 1.0 && params.gamma <= 2.0 + kRegimeTolerance;
    r.pathwise_lower_ok = params.rho > 1.0 && params.rho <= 1.5 + kRegimeTolerance && gamma_le_2;
    r.pathwise_upper_ok = params.rho > 1.0 && strict && gamma_le_2;
    r.time_avg_ok = params.rho > 1.5 + kRegimeTolerance;
    return r;
}

bool inverse_moment_ok(const ModelParams& params, double q) {
    return 2.0 * params.rho <= params.gamma + 1.0 + kRegimeTolerance &&
           params.gamma <= q + 1.0 + kRegimeTolerance;
}

std::vector<std::string> regime_warnings(const RegimeReport& report, const ModelParams& params) {
    std::vector<std::string> out;
    std::ostringstream p;
    p << report.p;
    if (!report.moment_ok) {
        out.push_back("moment bound (p = " + p.str() +
                      ") requires 2*rho < gamma + 1, or 2*rho = gamma + 1 with a2 > (p-1)*sigma^2/2; got 2*rho = " +
                      std::to_string(2.0 * params.rho) + ", gamma + 1 = " + std::to_string(params.gamma + 1.0));
    }
    if (!report.second_moment_corollary_ok) {
        out.push_back("second-moment corollary requires 1 < rho <= (gamma+1)/2, with 2*a2 > sigma^2 on the boundary");
    }
    if (!report.inverse_moment_ok) {
        out.push_back("inverse first-moment bound requires 2*rho <= gamma + 1 and gamma <= 2");
    }
    if (!report.pathwise_lower_ok) {
        out.push_back("pathwise lower asymptotic (liminf log y/log t >= -1) requires 1 < rho <= 1.5 and 1 < gamma <= 2");
    }
    if (!report.pathwise_upper_ok) {
        out.push_back("pathwise upper asymptotic (limsup log y/log t <= 1) requires 1 < rho < (gamma+1)/2 and 1 < gamma <= 2");
    }
    if (!report.time_avg_ok) {
        out.push_back("time-averaged E(y^-2 + y^2) bound requires rho > 1.5");
    }
    return out;
}

double lyapunov(double theta, double y) {
    check_theta(theta);
    if (!(y > 0.0)) throw DomainError("lyapunov function is defined for y > 0 only");
    return std::pow(y, theta) - 1.0 - theta * std::log(y);
}

double generator_with_jump(const ModelParams& params, double theta, double y) {
    check_theta(theta);
    if (!(y > 0.0)) throw DomainError("generator is defined for y > 0 only");
    const double th = theta;
    const double g = params.gamma;
    const double r = params.rho;
    const double s2 = params.sigma * params.sigma;
    const double l = params.lambda;
    const double d = params.delta;

    double v = params.a_neg1 * th * std::pow(y, th - 2.0);
    v -= params.a0 * th * std::pow(y, th - 1.0);
    v += params.a1 * th * std::pow(y, th);
    v -= params.a2 * th * std::pow(y, th + g - 1.0);
    v -= params.a_neg1 * th / (y * y);
    v += params.a0 * th / y;
    v -= params.a1 * th;
    v += params.a2 * th * std::pow(y, g - 1.0);
    v -= s2 * th * (1.0 - th) / 2.0 * std::pow(y, th + 2.0 * r - 2.0);
    v += s2 * th / 2.0 * std::pow(y, 2.0 * r - 2.0);
    v += l * (std::pow(1.0 + d, th) - 1.0) * std::pow(y, th);
    v -= l * th * std::log1p(d);
    return v;
}

GeneratorScan generator_supremum(const ModelParams& params, double theta, double lo, double hi,
                                 std::size_t points) {
    if (!(lo > 0.0 && hi > lo) || points < 2) {
        throw std::invalid_argument("generator scan needs 0 < lo < hi and at least two points");
    }
    GeneratorScan scan;
    scan.y.resize(points);
    scan.values.resize(points);
    scan.supremum = -std::numeric_limits<double>::infinity();
    const double llo = std::log(lo);
    const double lhi = std::log(hi);
    scan.finite = true;
    for (std::size_t i = 0; i < points; ++i) {
        const double frac = static_cast<double>(i) / static_cast<double>(points - 1);
        const double y = i + 1 == points ? hi : std::exp(llo + frac * (lhi - llo));
        const double v = generator_with_jump(params, theta, y);
        scan.y[i] = y;
        scan.values[i] = v;
        if (std::isnan(v) || v == std::numeric_limits<double>::infinity()) scan.finite = false;
        if (v > scan.supremum) {
            scan.supremum = v;
            scan.argmax = y;
        }
    }
    scan.finite = scan.finite && std::isfinite(scan.supremum);
    return scan;
}

}  // namespace ajsim

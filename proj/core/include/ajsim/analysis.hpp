#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ajsim/estimate.hpp"
#include "ajsim/model.hpp"
#include "ajsim/noise.hpp"

namespace ajsim {

// ---------------------------------------------------------------------------
// Moments

/// Per-node Monte Carlo estimates of E|Y(t_n)|^p.
struct MomentCurve {
    double p = 2.0;
    std::vector<double> times;
    std::vector<EstimateWithCI> nodes;
    std::size_t n_paths = 0;
    std::size_t n_excluded = 0;
    /// Included paths with at least one negative iterate (|Y| is used for those).
    std::size_t n_negative_paths = 0;
    std::vector<std::string> warnings;
};

/// E|Y|^p at every grid node. Overflow-aborted paths are excluded. Regime hypotheses are
/// checked and reported as warnings; the estimate is computed regardless.
MomentCurve moment_curve(const ModelParams& params, double p, const SimGrid& grid, const Ensemble& ensemble);

struct MomentBoundCheck {
    double initial = 0.0;   ///< |y0|^p
    double plateau = 0.0;   ///< mean node estimate over the trailing fraction of the horizon
    double ceiling = 0.0;   ///< max(initial, plateau)
    /// Largest (estimate - ceiling) / SE over nodes; nodes with zero SE use the raw excess.
    double worst_excess_se = 0.0;
    std::size_t worst_node = 0;
    bool ok = false;
};

/// Checks that no node estimate exceeds max(|y0|^p, plateau) + tolerance_se * SE.
MomentBoundCheck check_moment_bound(const MomentCurve& curve, double y0, double tail_fraction = 0.25,
                                    double tolerance_se = 4.0);

/// Trapezoidal time average (1/T) int_0^T sum_k |Y(s)|^{e_k} ds, estimated across paths.
EstimateWithCI time_avg_moment(const ModelParams& params, std::span<const double> exponents, const SimGrid& grid,
                               const Ensemble& ensemble);
EstimateWithCI time_avg_moment(const ModelParams& params, double exponent, const SimGrid& grid,
                               const Ensemble& ensemble);

// ---------------------------------------------------------------------------
// Stochastic boundedness

/// Fraction of paths with 1/n1 < Y(T) < n1.
EstimateWithCI occupancy_probability(const ModelParams& params, const SimGrid& grid, const Ensemble& ensemble,
                                     double n1);

struct OccupancySearch {
    std::vector<double> n1_values;
    std::vector<EstimateWithCI> estimates;
    std::optional<double> n1_found;
};

/// Doubles n1 from `n1_start` until the occupancy estimate reaches 1 - epsilon, on a single
/// simulated ensemble.
OccupancySearch occupancy_search(const ModelParams& params, const SimGrid& grid, const Ensemble& ensemble,
                                 double epsilon, double n1_start = 2.0, std::size_t max_doublings = 40);

// ---------------------------------------------------------------------------
// Pathwise asymptotics

struct LogRatioSummary {
    std::vector<double> sample_times;
    std::vector<double> mean_ratio;    ///< per sample time, over usable samples
    std::size_t n_samples = 0;         ///< usable (path, time) pairs
    std::size_t n_inside = 0;
    std::size_t n_nonpositive = 0;     ///< samples skipped because Y <= 0
    std::size_t n_paths = 0;
    std::size_t n_excluded = 0;
    double band = 0.3;
    double min_ratio = 0.0;
    double max_ratio = 0.0;
    EstimateWithCI fraction_inside;
};

/// Samples log Y(t) / log t at t = spacing, 2 spacing, ..., t_large and reports how many
/// fall in [-(1 + band), 1 + band].
LogRatioSummary pathwise_log_ratio(const ModelParams& params, double t_large, double dt, const Ensemble& ensemble,
                                   double band = 0.3, double spacing = 10.0);

// ---------------------------------------------------------------------------
// Poisson stochastic integral inequalities

enum class Integrand { constant, identity };

const char* to_string(Integrand h);

struct InequalityResult {
    std::string name;
    EstimateWithCI lhs;
    double rhs = 0.0;
    double margin = 0.0;  ///< rhs + 3 SE - lhs
    bool pass = false;
};

struct PoissonIntegralCheck {
    double lambda = 0.0;
    double horizon = 0.0;
    Integrand integrand = Integrand::constant;
    double h_square_integral = 0.0;  ///< int_0^T h(s)^2 ds
    /// [0] E|int h dN|^2 <= 2 lambda (1 + lambda T) int h^2
    /// [1] E sup_t |int_0^t h dN~|^2 <= 4 lambda int h^2
    /// [2] E sup_t |int_0^t h dN|^2 <= (8 lambda + 2 lambda T^2) int h^2
    std::vector<InequalityResult> inequalities;
    /// Third inequality with the constant 8 lambda + 2 lambda^2 T obtained from the first two.
    InequalityResult sup_dn_rederived;
    bool pass = false;
};

/// Monte Carlo check of the three Poisson-integral inequalities for a deterministic integrand,
/// using exact jump times. Passes when every left side is within 3 SE of its bound.
PoissonIntegralCheck poisson_integral_inequality_check(double lambda, double horizon, std::size_t n_samples,
                                                       std::uint64_t seed, Integrand h, unsigned threads = 0);

// ---------------------------------------------------------------------------
// Convergence in probability

struct ConvergenceLevel {
    double dt = 0.0;
    std::size_t factor = 0;                 ///< reference steps per level step
    EstimateWithCI exceed_step;             ///< P(sup |Y_ref - Ybar|^2 >= xi)
    EstimateWithCI exceed_continuous;       ///< P(sup |Y_ref - Y|^2 >= xi)
    EstimateWithCI exceed_interp_gap;       ///< P(sup |Y - Ybar|^2 >= xi)
    EstimateWithCI sup_sq_step;             ///< E sup |Y_ref - Ybar|^2
    EstimateWithCI sup_sq_continuous;
    EstimateWithCI sup_sq_interp_gap;
};

struct ConvergenceReport {
    double xi = 0.0;
    double horizon = 0.0;
    double dt_ref = 0.0;
    std::vector<ConvergenceLevel> levels;
    bool monotone_ok = false;      ///< exceed_step nonincreasing up to one CI width
    bool gap_trend_ok = false;     ///< sup_sq_interp_gap nonincreasing up to one CI width
    std::size_t n_paths = 0;
    std::size_t n_excluded = 0;
};

/// True when every increase along the sequence is no larger than the wider CI of the pair.
bool nonincreasing_within_ci(std::span<const EstimateWithCI> seq);

/// Coupled convergence study. A reference path on dt_ref = min(dt_levels) / ref_factor and
/// every level are driven by the same fine noise, aggregated per level; suprema are taken
/// over reference nodes. Throws std::invalid_argument for non-descending or non-nested levels.
ConvergenceReport convergence_in_probability(const ModelParams& params, double horizon, double xi,
                                             std::span<const double> dt_levels, const Ensemble& ensemble,
                                             std::size_t ref_factor = 256);

}  // namespace ajsim

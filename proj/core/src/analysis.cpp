#include "ajsim/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "ajsim/em.hpp"
#include "ajsim/parallel.hpp"
#include "ajsim/rng.hpp"
#include "path_ensemble.hpp"

namespace ajsim {

namespace {

constexpr std::size_t kBlockPaths = 64;

double abs_pow(double y, double p) { return std::pow(std::fabs(y), p); }

void require_paths(const Ensemble& ensemble) {
    if (ensemble.n_paths == 0) throw std::invalid_argument("ensemble needs at least one path");
}

void require_usable(std::size_t used, const char* what) {
    if (used == 0) throw RuntimeAbort(std::string(what) + ": every path overflowed");
}

struct NodeBlock {
    std::vector<CompensatedSum> sum;
    std::vector<CompensatedSum> sum_sq;
    std::size_t used = 0;
    std::size_t excluded = 0;
    std::size_t negative = 0;
};

}  // namespace

MomentCurve moment_curve(const ModelParams& params, double p, const SimGrid& grid, const Ensemble& ensemble) {
    require_paths(ensemble);
    MomentCurve curve;
    curve.p = p;
    curve.n_paths = ensemble.n_paths;
    if (p >= 2.0) {
        const auto report = regime_check(params, p);
        if (!report.moment_ok) {
            std::ostringstream os;
            os << "moment bound for p = " << p
               << " needs 2*rho < gamma + 1, or 2*rho = gamma + 1 with a2 > (p-1)*sigma^2/2";
            curve.warnings.push_back(os.str());
        }
    } else if (p < 0.0) {
        if (!inverse_moment_ok(params, -p)) {
            std::ostringstream os;
            os << "inverse moment bound for p = " << p << " needs 2*rho <= gamma + 1 and gamma <= " << (1.0 - p);
            curve.warnings.push_back(os.str());
        }
    } else {
        curve.warnings.push_back("no moment bound is established for 0 <= p < 2");
    }

    const std::size_t nodes = grid.steps() + 1;
    const std::size_t n_blocks = (ensemble.n_paths + kBlockPaths - 1) / kBlockPaths;
    // Sums are taken about |y0|^p, which keeps the variance free of cancellation near the start.
    const double shift = abs_pow(params.y0, p);
    std::vector<NodeBlock> blocks(n_blocks);
    parallel_for(n_blocks, ensemble.threads, [&](std::size_t b) {
        NodeBlock& block = blocks[b];
        block.sum.resize(nodes);
        block.sum_sq.resize(nodes);
        const std::size_t end = std::min(ensemble.n_paths, (b + 1) * kBlockPaths);
        for (std::size_t i = b * kBlockPaths; i < end; ++i) {
            const EmPath path = simulate_path(params, ensemble_noise(grid, params.lambda, ensemble, i));
            if (path.aborted()) {
                ++block.excluded;
                continue;
            }
            ++block.used;
            if (path.has_negative()) ++block.negative;
            for (std::size_t n = 0; n < nodes; ++n) {
                const double d = abs_pow(path.values[n], p) - shift;
                block.sum[n].add(d);
                block.sum_sq[n].add(d * d);
            }
        }
    });

    std::vector<CompensatedSum> sum(nodes);
    std::vector<CompensatedSum> sum_sq(nodes);
    std::size_t used = 0;
    for (const auto& block : blocks) {
        used += block.used;
        curve.n_excluded += block.excluded;
        curve.n_negative_paths += block.negative;
        if (block.used == 0) continue;
        for (std::size_t n = 0; n < nodes; ++n) {
            sum[n].merge(block.sum[n]);
            sum_sq[n].merge(block.sum_sq[n]);
        }
    }
    require_usable(used, "moment curve");
    const double nn = static_cast<double>(used);
    curve.times.resize(nodes);
    curve.nodes.resize(nodes);
    for (std::size_t n = 0; n < nodes; ++n) {
        const double s1 = sum[n].value();
        const double mean = shift + s1 / nn;
        const double var = used > 1 ? (sum_sq[n].value() - s1 * s1 / nn) / (nn - 1.0) : 0.0;
        curve.times[n] = grid.time(n);
        curve.nodes[n] = estimate_from_moments(mean, var, used, curve.n_excluded);
    }
    return curve;
}

MomentBoundCheck check_moment_bound(const MomentCurve& curve, double y0, double tail_fraction, double tolerance_se) {
    MomentBoundCheck check;
    if (curve.nodes.empty()) return check;
    const std::size_t nodes = curve.nodes.size();
    const double horizon = curve.times.back();
    const double tail_start = horizon * (1.0 - tail_fraction);
    CompensatedSum tail;
    std::size_t tail_count = 0;
    for (std::size_t n = 0; n < nodes; ++n) {
        if (curve.times[n] >= tail_start) {
            tail.add(curve.nodes[n].point);
            ++tail_count;
        }
    }
    check.initial = abs_pow(y0, curve.p);
    check.plateau = tail_count > 0 ? tail.value() / static_cast<double>(tail_count) : curve.nodes.back().point;
    check.ceiling = std::max(check.initial, check.plateau);
    check.worst_excess_se = -std::numeric_limits<double>::infinity();
    check.ok = true;
    for (std::size_t n = 0; n < nodes; ++n) {
        const auto& e = curve.nodes[n];
        const double excess = e.point - check.ceiling;
        const double score = e.std_error > 0.0 ? excess / e.std_error : excess;
        if (score > check.worst_excess_se) {
            check.worst_excess_se = score;
            check.worst_node = n;
        }
        if (e.point > check.ceiling + tolerance_se * e.std_error) check.ok = false;
    }
    return check;
}

EstimateWithCI time_avg_moment(const ModelParams& params, std::span<const double> exponents, const SimGrid& grid,
                               const Ensemble& ensemble) {
    require_paths(ensemble);
    if (exponents.empty()) throw std::invalid_argument("time average needs at least one exponent");
    std::vector<double> averages(ensemble.n_paths, 0.0);
    std::vector<char> aborted(ensemble.n_paths, 0);
    const double half_dt = grid.dt() / 2.0;
    detail::for_each_path(params, grid, ensemble, [&](std::size_t i, const EmPath& path) {
        if (path.aborted()) {
            aborted[i] = 1;
            return;
        }
        CompensatedSum total;
        for (double e : exponents) {
            CompensatedSum integral;
            for (std::size_t n = 0; n + 1 < path.values.size(); ++n) {
                integral.add(half_dt * (abs_pow(path.values[n], e) + abs_pow(path.values[n + 1], e)));
            }
            total.add(integral.value() / grid.horizon());
        }
        averages[i] = total.value();
    });
    std::vector<double> used;
    used.reserve(ensemble.n_paths);
    std::size_t excluded = 0;
    for (std::size_t i = 0; i < ensemble.n_paths; ++i) {
        if (aborted[i]) {
            ++excluded;
        } else {
            used.push_back(averages[i]);
        }
    }
    require_usable(used.size(), "time average");
    return estimate_mean(used, excluded);
}

EstimateWithCI time_avg_moment(const ModelParams& params, double exponent, const SimGrid& grid,
                               const Ensemble& ensemble) {
    const double e[1] = {exponent};
    return time_avg_moment(params, std::span<const double>(e), grid, ensemble);
}

namespace {

struct Terminal {
    std::vector<double> values;  // terminal value per usable path
    std::size_t excluded = 0;
};

Terminal terminal_values(const ModelParams& params, const SimGrid& grid, const Ensemble& ensemble) {
    std::vector<double> last(ensemble.n_paths, 0.0);
    std::vector<char> aborted(ensemble.n_paths, 0);
    detail::for_each_path(params, grid, ensemble, [&](std::size_t i, const EmPath& path) {
        aborted[i] = path.aborted() ? 1 : 0;
        last[i] = path.values.back();
    });
    Terminal out;
    for (std::size_t i = 0; i < ensemble.n_paths; ++i) {
        if (aborted[i]) {
            ++out.excluded;
        } else {
            out.values.push_back(last[i]);
        }
    }
    return out;
}

EstimateWithCI occupancy_from(const Terminal& terminal, double n1) {
    std::size_t inside = 0;
    for (double y : terminal.values) {
        if (y > 1.0 / n1 && y < n1) ++inside;
    }
    return estimate_proportion(inside, terminal.values.size(), terminal.excluded);
}

}  // namespace

EstimateWithCI occupancy_probability(const ModelParams& params, const SimGrid& grid, const Ensemble& ensemble,
                                     double n1) {
    require_paths(ensemble);
    if (!(n1 > 1.0)) throw std::invalid_argument("occupancy interval needs n1 > 1");
    const Terminal terminal = terminal_values(params, grid, ensemble);
    require_usable(terminal.values.size(), "occupancy");
    return occupancy_from(terminal, n1);
}

OccupancySearch occupancy_search(const ModelParams& params, const SimGrid& grid, const Ensemble& ensemble,
                                 double epsilon, double n1_start, std::size_t max_doublings) {
    require_paths(ensemble);
    if (!(epsilon > 0.0 && epsilon < 1.0)) throw std::invalid_argument("occupancy epsilon must lie in (0, 1)");
    if (!(n1_start > 1.0)) throw std::invalid_argument("occupancy interval needs n1 > 1");
    const Terminal terminal = terminal_values(params, grid, ensemble);
    require_usable(terminal.values.size(), "occupancy search");
    OccupancySearch search;
    double n1 = n1_start;
    for (std::size_t k = 0; k <= max_doublings; ++k, n1 *= 2.0) {
        const auto est = occupancy_from(terminal, n1);
        search.n1_values.push_back(n1);
        search.estimates.push_back(est);
        if (est.point >= 1.0 - epsilon) {
            search.n1_found = n1;
            break;
        }
    }
    return search;
}

LogRatioSummary pathwise_log_ratio(const ModelParams& params, double t_large, double dt, const Ensemble& ensemble,
                                   double band, double spacing) {
    require_paths(ensemble);
    if (!(spacing > 1.0) || !(t_large >= spacing)) {
        throw std::invalid_argument("log-ratio sampling needs spacing > 1 and t_large >= spacing");
    }
    const SimGrid grid = SimGrid::from_dt(t_large, dt);
    LogRatioSummary summary;
    summary.band = band;
    summary.n_paths = ensemble.n_paths;
    for (double t = spacing; t <= t_large * (1.0 + 1e-12); t += spacing) summary.sample_times.push_back(std::min(t, t_large));
    const std::size_t m = summary.sample_times.size();

    // Per path: ratio per sample time, NaN when Y <= 0.
    std::vector<double> ratios(ensemble.n_paths * m, std::numeric_limits<double>::quiet_NaN());
    std::vector<char> aborted(ensemble.n_paths, 0);
    detail::for_each_path(params, grid, ensemble, [&](std::size_t i, const EmPath& path) {
        if (path.aborted()) {
            aborted[i] = 1;
            return;
        }
        for (std::size_t k = 0; k < m; ++k) {
            const double t = summary.sample_times[k];
            const double y = step_interpolant(path, t);
            if (y > 0.0) ratios[i * m + k] = std::log(y) / std::log(t);
        }
    });

    std::vector<CompensatedSum> per_time(m);
    std::vector<std::size_t> per_time_count(m, 0);
    summary.min_ratio = std::numeric_limits<double>::infinity();
    summary.max_ratio = -std::numeric_limits<double>::infinity();
    const double limit = 1.0 + band;
    for (std::size_t i = 0; i < ensemble.n_paths; ++i) {
        if (aborted[i]) {
            ++summary.n_excluded;
            continue;
        }
        for (std::size_t k = 0; k < m; ++k) {
            const double r = ratios[i * m + k];
            if (std::isnan(r)) {
                ++summary.n_nonpositive;
                continue;
            }
            ++summary.n_samples;
            if (r >= -limit && r <= limit) ++summary.n_inside;
            per_time[k].add(r);
            ++per_time_count[k];
            summary.min_ratio = std::min(summary.min_ratio, r);
            summary.max_ratio = std::max(summary.max_ratio, r);
        }
    }
    require_usable(summary.n_samples, "pathwise log ratio");
    summary.mean_ratio.resize(m);
    for (std::size_t k = 0; k < m; ++k) {
        summary.mean_ratio[k] = per_time_count[k] > 0 ? per_time[k].value() / static_cast<double>(per_time_count[k])
                                                      : std::numeric_limits<double>::quiet_NaN();
    }
    summary.fraction_inside = estimate_proportion(summary.n_inside, summary.n_samples, summary.n_excluded);
    return summary;
}

const char* to_string(Integrand h) { return h == Integrand::constant ? "constant" : "identity"; }

PoissonIntegralCheck poisson_integral_inequality_check(double lambda, double horizon, std::size_t n_samples,
                                                       std::uint64_t seed, Integrand h, unsigned threads) {
    if (!(lambda >= 0.0) || !(horizon > 0.0) || n_samples < 2) {
        throw std::invalid_argument("Poisson integral check needs lambda >= 0, T > 0 and at least two samples");
    }
    auto h_of = [h](double s) { return h == Integrand::constant ? 1.0 : s; };
    auto h_int = [h](double t) { return h == Integrand::constant ? t : t * t / 2.0; };

    std::vector<double> sq_dn(n_samples);
    std::vector<double> sup_sq_compensated(n_samples);
    parallel_for(n_samples, threads, [&](std::size_t i) {
        double integral = 0.0;
        double sup_abs = 0.0;
        if (lambda > 0.0) {
            PhiloxStream stream(seed, i, StreamTag::poisson_integral);
            double t = 0.0;
            for (;;) {
                t += -std::log(stream.uniform()) / lambda;
                if (t > horizon) break;
                // The compensated integral decreases between jumps, so its extremes sit at
                // the jump times (both one-sided limits) and at T.
                const double before = integral - lambda * h_int(t);
                integral += h_of(t);
                const double after = integral - lambda * h_int(t);
                sup_abs = std::max({sup_abs, std::fabs(before), std::fabs(after)});
            }
            sup_abs = std::max(sup_abs, std::fabs(integral - lambda * h_int(horizon)));
        }
        sq_dn[i] = integral * integral;
        sup_sq_compensated[i] = sup_abs * sup_abs;
    });

    PoissonIntegralCheck check;
    check.lambda = lambda;
    check.horizon = horizon;
    check.integrand = h;
    check.h_square_integral = h == Integrand::constant ? horizon : horizon * horizon * horizon / 3.0;
    const double h2 = check.h_square_integral;

    auto make = [](std::string name, EstimateWithCI lhs, double rhs) {
        InequalityResult r;
        r.name = std::move(name);
        r.lhs = lhs;
        r.rhs = rhs;
        r.margin = rhs + 3.0 * lhs.std_error - lhs.point;
        r.pass = r.margin >= 0.0;
        return r;
    };
    const auto lhs_dn = estimate_mean(sq_dn);
    const auto lhs_sup_comp = estimate_mean(sup_sq_compensated);
    // h >= 0, so the uncompensated integral is nondecreasing and its supremum is attained at T.
    const auto lhs_sup_dn = lhs_dn;
    check.inequalities.push_back(make("second_moment_dN", lhs_dn, 2.0 * lambda * (1.0 + lambda * horizon) * h2));
    check.inequalities.push_back(make("sup_compensated", lhs_sup_comp, 4.0 * lambda * h2));
    check.inequalities.push_back(make("sup_dN", lhs_sup_dn, (8.0 * lambda + 2.0 * lambda * horizon * horizon) * h2));
    check.sup_dn_rederived =
        make("sup_dN_rederived", lhs_sup_dn, (8.0 * lambda + 2.0 * lambda * lambda * horizon) * h2);
    check.pass = std::all_of(check.inequalities.begin(), check.inequalities.end(),
                             [](const InequalityResult& r) { return r.pass; });
    return check;
}

bool nonincreasing_within_ci(std::span<const EstimateWithCI> seq) {
    for (std::size_t i = 0; i + 1 < seq.size(); ++i) {
        const double rise = seq[i + 1].point - seq[i].point;
        const double width = std::max(seq[i].ci_high - seq[i].ci_low, seq[i + 1].ci_high - seq[i + 1].ci_low);
        if (rise > width) return false;
    }
    return true;
}

ConvergenceReport convergence_in_probability(const ModelParams& params, double horizon, double xi,
                                             std::span<const double> dt_levels, const Ensemble& ensemble,
                                             std::size_t ref_factor) {
    require_paths(ensemble);
    if (!(xi > 0.0)) throw std::invalid_argument("convergence threshold xi must be > 0");
    if (dt_levels.empty()) throw std::invalid_argument("convergence study needs at least one level");
    if (ref_factor == 0) throw std::invalid_argument("reference refinement must be positive");
    for (std::size_t i = 0; i + 1 < dt_levels.size(); ++i) {
        if (!(dt_levels[i + 1] < dt_levels[i])) throw std::invalid_argument("dt_levels must be strictly descending");
    }
    const SimGrid ref_grid = SimGrid::from_dt(horizon, dt_levels.back()).refined(ref_factor);
    std::vector<std::size_t> factors;
    for (double dt : dt_levels) {
        const SimGrid level = SimGrid::from_dt(horizon, dt);
        if (ref_grid.steps() % level.steps() != 0) {
            throw std::invalid_argument("level dt " + std::to_string(dt) + " is not nested in the reference grid");
        }
        factors.push_back(ref_grid.steps() / level.steps());
    }
    const std::size_t n_levels = factors.size();
    const std::size_t n_paths = ensemble.n_paths;

    // Per path and level: sup over reference nodes of the three squared distances.
    std::vector<double> sup_step(n_paths * n_levels, 0.0);
    std::vector<double> sup_cont(n_paths * n_levels, 0.0);
    std::vector<double> sup_gap(n_paths * n_levels, 0.0);
    std::vector<char> excluded(n_paths, 0);

    Ensemble fine = ensemble;
    fine.refine = 1;
    parallel_for(n_paths, ensemble.threads, [&](std::size_t i) {
        const DrivingNoise noise = ensemble_noise(ref_grid, params.lambda, fine, i);
        const EmPath reference = simulate_path(params, noise);
        if (reference.aborted()) {
            excluded[i] = 1;
            return;
        }
        const double dt_ref = ref_grid.dt();
        for (std::size_t l = 0; l < n_levels; ++l) {
            const std::size_t factor = factors[l];
            const EmPath level = simulate_path(params, coarsen(noise, factor));
            if (level.aborted()) {
                excluded[i] = 1;
                return;
            }
            double worst_step = 0.0;
            double worst_cont = 0.0;
            double worst_gap = 0.0;
            const std::size_t level_steps = level.grid.steps();
            for (std::size_t n = 0; n <= level_steps; ++n) {
                const double y = level.values[n];
                const std::size_t k0 = n * factor;
                if (n == level_steps) {
                    const double e = reference.values[k0] - y;
                    worst_step = std::max(worst_step, e * e);
                    worst_cont = std::max(worst_cont, e * e);
                    break;
                }
                bool clamped = false;
                const double f = drift_clamped(params, y, clamped);
                const double g = diffusion(params, y);
                const double j = jump(params, y);
                double db = 0.0;
                std::uint32_t dn = 0;
                for (std::size_t k = k0; k < k0 + factor; ++k) {
                    const double gap = f * (static_cast<double>(k - k0) * dt_ref) + g * db + j * static_cast<double>(dn);
                    const double step_err = reference.values[k] - y;
                    const double cont_err = step_err - gap;
                    worst_step = std::max(worst_step, step_err * step_err);
                    worst_cont = std::max(worst_cont, cont_err * cont_err);
                    worst_gap = std::max(worst_gap, gap * gap);
                    db += noise.brownian[k];
                    dn += noise.poisson[k];
                }
            }
            sup_step[i * n_levels + l] = worst_step;
            sup_cont[i * n_levels + l] = worst_cont;
            sup_gap[i * n_levels + l] = worst_gap;
        }
    });

    ConvergenceReport report;
    report.xi = xi;
    report.horizon = horizon;
    report.dt_ref = ref_grid.dt();
    report.n_paths = n_paths;
    for (char e : excluded) report.n_excluded += e ? 1 : 0;
    const std::size_t used = n_paths - report.n_excluded;
    require_usable(used, "convergence study");

    std::vector<EstimateWithCI> exceed_seq;
    std::vector<EstimateWithCI> gap_seq;
    for (std::size_t l = 0; l < n_levels; ++l) {
        std::vector<double> s_step;
        std::vector<double> s_cont;
        std::vector<double> s_gap;
        std::size_t hit_step = 0;
        std::size_t hit_cont = 0;
        std::size_t hit_gap = 0;
        for (std::size_t i = 0; i < n_paths; ++i) {
            if (excluded[i]) continue;
            const double a = sup_step[i * n_levels + l];
            const double b = sup_cont[i * n_levels + l];
            const double c = sup_gap[i * n_levels + l];
            s_step.push_back(a);
            s_cont.push_back(b);
            s_gap.push_back(c);
            hit_step += a >= xi ? 1 : 0;
            hit_cont += b >= xi ? 1 : 0;
            hit_gap += c >= xi ? 1 : 0;
        }
        ConvergenceLevel level;
        level.dt = dt_levels[l];
        level.factor = factors[l];
        level.exceed_step = estimate_proportion(hit_step, used, report.n_excluded);
        level.exceed_continuous = estimate_proportion(hit_cont, used, report.n_excluded);
        level.exceed_interp_gap = estimate_proportion(hit_gap, used, report.n_excluded);
        level.sup_sq_step = estimate_mean(s_step, report.n_excluded);
        level.sup_sq_continuous = estimate_mean(s_cont, report.n_excluded);
        level.sup_sq_interp_gap = estimate_mean(s_gap, report.n_excluded);
        exceed_seq.push_back(level.exceed_step);
        gap_seq.push_back(level.sup_sq_interp_gap);
        report.levels.push_back(level);
    }
    report.monotone_ok = nonincreasing_within_ci(exceed_seq);
    report.gap_trend_ok = nonincreasing_within_ci(gap_seq);
    return report;
}

}  // namespace ajsim

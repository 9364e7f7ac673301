#pragma once

#include <cstddef>
#include <vector>

#include "ajsim/estimate.hpp"
#include "ajsim/model.hpp"
#include "ajsim/noise.hpp"

namespace ajsim {

struct BondSpec {
    double maturity = 1.0;
};

/// Up-and-out call on the state itself, monitored at grid nodes. The payoff is undiscounted.
struct BarrierOptionSpec {
    double strike = 1.0;
    double barrier = 2.0;
    double maturity = 1.0;
};

/// E[exp(-int_0^T |Ybar(t)| dt)] with the integral taken exactly for the step interpolant
/// (dt * sum of |Y_n| over left endpoints). Overflow-aborted paths are excluded and counted.
/// Throws std::invalid_argument when the grid horizon differs from the maturity and
/// RuntimeAbort when no path survives.
EstimateWithCI bond_price(const ModelParams& params, const BondSpec& spec, const SimGrid& grid,
                          const Ensemble& ensemble);

/// Per-path payoffs (Y_N - strike)^+ 1{0 <= Y_n <= barrier for every node n}. Aborted paths
/// pay zero; their count is returned through `n_aborted` when non-null.
std::vector<double> barrier_payoffs(const ModelParams& params, const BarrierOptionSpec& spec, const SimGrid& grid,
                                    const Ensemble& ensemble, std::size_t* n_aborted = nullptr);

/// Ensemble mean of barrier_payoffs; n_excluded reports the aborted (zero-payoff) paths.
EstimateWithCI barrier_option_price(const ModelParams& params, const BarrierOptionSpec& spec, const SimGrid& grid,
                                    const Ensemble& ensemble);

}  // namespace ajsim

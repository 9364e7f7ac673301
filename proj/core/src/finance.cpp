#include "ajsim/finance.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "path_ensemble.hpp"

namespace ajsim {

namespace {

void require_maturity(const SimGrid& grid, double maturity) {
    if (!(maturity > 0.0)) throw std::invalid_argument("maturity must be > 0");
    if (std::fabs(grid.horizon() - maturity) > 1e-12 * std::max(1.0, maturity)) {
        throw std::invalid_argument("grid horizon must equal the contract maturity");
    }
}

}  // namespace

EstimateWithCI bond_price(const ModelParams& params, const BondSpec& spec, const SimGrid& grid,
                          const Ensemble& ensemble) {
    require_maturity(grid, spec.maturity);
    if (ensemble.n_paths == 0) throw std::invalid_argument("ensemble needs at least one path");
    std::vector<double> discount(ensemble.n_paths, 0.0);
    std::vector<char> aborted(ensemble.n_paths, 0);
    detail::for_each_path(params, grid, ensemble, [&](std::size_t i, const EmPath& path) {
        if (path.aborted()) {
            aborted[i] = 1;
            return;
        }
        CompensatedSum area;
        for (std::size_t n = 0; n + 1 < path.values.size(); ++n) area.add(std::fabs(path.values[n]));
        discount[i] = std::exp(-grid.dt() * area.value());
    });
    std::vector<double> used;
    used.reserve(ensemble.n_paths);
    std::size_t excluded = 0;
    for (std::size_t i = 0; i < ensemble.n_paths; ++i) {
        if (aborted[i]) {
            ++excluded;
        } else {
            used.push_back(discount[i]);
        }
    }
    if (used.empty()) throw RuntimeAbort("bond price: every path overflowed");
    return estimate_mean(used, excluded);
}

std::vector<double> barrier_payoffs(const ModelParams& params, const BarrierOptionSpec& spec, const SimGrid& grid,
                                    const Ensemble& ensemble, std::size_t* n_aborted) {
    require_maturity(grid, spec.maturity);
    if (!(spec.strike > 0.0)) throw std::invalid_argument("strike must be > 0");
    if (!(spec.barrier > 0.0)) throw std::invalid_argument("barrier must be > 0");
    if (ensemble.n_paths == 0) throw std::invalid_argument("ensemble needs at least one path");
    std::vector<double> payoff(ensemble.n_paths, 0.0);
    std::vector<char> aborted(ensemble.n_paths, 0);
    detail::for_each_path(params, grid, ensemble, [&](std::size_t i, const EmPath& path) {
        if (path.aborted()) {
            aborted[i] = 1;
            return;
        }
        const bool alive = std::all_of(path.values.begin(), path.values.end(),
                                       [&](double y) { return y >= 0.0 && y <= spec.barrier; });
        payoff[i] = alive ? std::max(path.values.back() - spec.strike, 0.0) : 0.0;
    });
    if (n_aborted != nullptr) {
        *n_aborted = static_cast<std::size_t>(std::count(aborted.begin(), aborted.end(), 1));
    }
    return payoff;
}

EstimateWithCI barrier_option_price(const ModelParams& params, const BarrierOptionSpec& spec, const SimGrid& grid,
                                    const Ensemble& ensemble) {
    std::size_t n_aborted = 0;
    const auto payoff = barrier_payoffs(params, spec, grid, ensemble, &n_aborted);
    if (n_aborted == payoff.size()) throw RuntimeAbort("barrier price: every path overflowed");
    return estimate_mean(payoff, n_aborted);
}

}  // namespace ajsim

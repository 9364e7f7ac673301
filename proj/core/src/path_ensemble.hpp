#pragma once

#include <cstddef>

#include "ajsim/em.hpp"
#include "ajsim/noise.hpp"
#include "ajsim/parallel.hpp"

namespace ajsim::detail {

/// Simulates every path of an ensemble and hands (index, path) to `visit`, possibly from
/// several threads at once. `visit` must only write state owned by its index.
template <class Visit>
void for_each_path(const ModelParams& params, const SimGrid& grid, const Ensemble& ensemble, Visit&& visit) {
    parallel_for(ensemble.n_paths, ensemble.threads, [&](std::size_t i) {
        const DrivingNoise noise = ensemble_noise(grid, params.lambda, ensemble, i);
        const EmPath path = simulate_path(params, noise);
        visit(i, path);
    });
}

}  // namespace ajsim::detail

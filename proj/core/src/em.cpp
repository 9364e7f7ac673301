#include "ajsim/em.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "ajsim/rng.hpp"

namespace ajsim {

const char* to_string(EventKind kind) {
    switch (kind) {
        case EventKind::negative_iterate: return "negative_iterate";
        case EventKind::floor_clamp: return "floor_clamp";
        case EventKind::overflow_abort: return "overflow_abort";
    }
    return "unknown";
}

bool EmPath::aborted() const { return count(EventKind::overflow_abort) > 0; }

bool EmPath::has_negative() const { return count(EventKind::negative_iterate) > 0; }

std::size_t EmPath::count(EventKind kind) const {
    return static_cast<std::size_t>(
        std::count_if(events.begin(), events.end(), [kind](const PathEvent& e) { return e.kind == kind; }));
}

StepResult em_step(const ModelParams& params, double y, double dt, double dB, std::uint32_t dN) {
    StepResult r;
    const double f = drift_clamped(params, y, r.clamped);
    r.value = y + f * dt + diffusion(params, y) * dB + jump(params, y) * static_cast<double>(dN);
    return r;
}

EmPath simulate_path(const ModelParams& params, const DrivingNoise& noise) {
    if (noise.lambda != params.lambda) {
        throw std::invalid_argument("noise was generated with a different jump intensity than the model");
    }
    const std::size_t steps = noise.grid.steps();
    if (noise.brownian.size() != steps || noise.poisson.size() != steps) {
        throw std::invalid_argument("noise record does not match its grid");
    }
    EmPath path;
    path.grid = noise.grid;
    path.params = params;
    path.values.resize(steps + 1);
    path.values[0] = params.y0;
    const double dt = noise.grid.dt();
    for (std::size_t n = 0; n < steps; ++n) {
        const double y = path.values[n];
        const StepResult r = em_step(params, y, dt, noise.brownian[n], noise.poisson[n]);
        if (r.clamped) path.events.push_back({n, EventKind::floor_clamp});
        if (!std::isfinite(r.value) || std::fabs(r.value) > kOverflowLimit) {
            path.events.push_back({n + 1, EventKind::overflow_abort});
            std::fill(path.values.begin() + static_cast<std::ptrdiff_t>(n + 1), path.values.end(), y);
            break;
        }
        path.values[n + 1] = r.value;
        if (r.value < 0.0) path.events.push_back({n + 1, EventKind::negative_iterate});
    }
    return path;
}

double step_interpolant(const EmPath& path, double t) {
    if (!(t >= 0.0 && t <= path.grid.horizon())) throw std::out_of_range("time outside [0, T]");
    return path.values[path.grid.index_at(t)];
}

double continuous_interpolant(const ModelParams& params, const EmPath& path, const DrivingNoise& noise, double t) {
    if (!(t >= 0.0 && t <= path.grid.horizon())) throw std::out_of_range("time outside [0, T]");
    if (!(noise.grid == path.grid)) throw std::invalid_argument("noise and path grids differ");
    const std::size_t n = path.grid.index_at(t);
    const double t_n = path.grid.time(n);
    if (n == path.grid.steps() || t == t_n) return path.values[n];

    const double dt = path.grid.dt();
    const double s = t - t_n;
    PhiloxStream bridge(noise.seed, noise.stream_id, StreamTag::bridge, static_cast<std::uint64_t>(n) << 20);
    const double dB_total = noise.brownian[n];
    const double db = s / dt * dB_total + std::sqrt(std::max(0.0, s * (dt - s) / dt)) * bridge.normal();
    std::uint32_t jumps = 0;
    for (std::uint32_t k = 0; k < noise.poisson[n]; ++k) {
        if (bridge.uniform() * dt <= s) ++jumps;
    }
    const double y = path.values[n];
    bool clamped = false;
    const double f = drift_clamped(params, y, clamped);
    return y + f * s + diffusion(params, y) * db + jump(params, y) * static_cast<double>(jumps);
}

}  // namespace ajsim

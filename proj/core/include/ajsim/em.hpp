#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "ajsim/model.hpp"
#include "ajsim/noise.hpp"

namespace ajsim {

/// Iterates larger than this in magnitude abort the path.
inline constexpr double kOverflowLimit = 1e100;

enum class EventKind { negative_iterate, floor_clamp, overflow_abort };

const char* to_string(EventKind kind);

/// `index` is the node index for negative_iterate and overflow_abort (the node whose value
/// was negative, or would have overflowed) and the step index n for floor_clamp (the step
/// computed from Y_n).
struct PathEvent {
    std::size_t index = 0;
    EventKind kind = EventKind::negative_iterate;

    friend bool operator==(const PathEvent&, const PathEvent&) = default;
};

/// Euler-Maruyama iterates Y_0..Y_N at the grid nodes plus the events met along the way.
struct EmPath {
    SimGrid grid;
    std::vector<double> values;
    std::vector<PathEvent> events;
    ModelParams params;

    bool aborted() const;
    bool has_negative() const;
    std::size_t count(EventKind kind) const;
};

struct StepResult {
    double value = 0.0;
    bool clamped = false;
};

/// One explicit step Y + f(Y) dt + sigma |Y|^rho dB + delta Y dN. No positivity repair;
/// a reciprocal argument below the singularity floor is clamped and reported.
StepResult em_step(const ModelParams& params, double y, double dt, double dB, std::uint32_t dN);

/// Runs the recursion over the whole noise record. Throws std::invalid_argument when the
/// noise intensity differs from params.lambda.
EmPath simulate_path(const ModelParams& params, const DrivingNoise& noise);

/// Piecewise-constant interpolant: Y_n on [t_n, t_{n+1}), Y_N at T.
double step_interpolant(const EmPath& path, double t);

/// Continuous-time EM interpolant
///   Y(t) = Y_n + f(Y_n)(t - t_n) + sigma |Y_n|^rho (B(t) - B(t_n)) + delta Y_n (N(t) - N(t_n)).
/// The intra-step Brownian value is drawn from the Brownian bridge pinned by dB_n and the
/// intra-step jump times are uniform given dN_n; both come from a dedicated random stream
/// keyed by (noise.seed, noise.stream_id, n), so repeated calls agree bit for bit.
double continuous_interpolant(const ModelParams& params, const EmPath& path, const DrivingNoise& noise, double t);

}  // namespace ajsim

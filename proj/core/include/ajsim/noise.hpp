#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <vector>

#include "ajsim/estimate.hpp"

namespace ajsim {

/// Uniform time mesh t_n = n * dt on [0, T] with dt = T / n_steps exactly and dt in (0, 1).
class SimGrid {
public:
    /// T = 1 with 1000 steps.
    SimGrid() = default;
    /// Throws std::invalid_argument unless horizon > 0, n_steps > 0 and dt < 1.
    static SimGrid from_steps(double horizon, std::size_t n_steps);
    /// Rounds T/dt to the nearest step count; rejects a dt that does not divide T to 1e-9 relative.
    static SimGrid from_dt(double horizon, double dt);

    double horizon() const { return horizon_; }
    double dt() const { return dt_; }
    std::size_t steps() const { return steps_; }

    /// t_n; time(steps()) == horizon() exactly.
    double time(std::size_t n) const;
    /// Largest n with time(n) <= t, clamped to [0, steps()].
    std::size_t index_at(double t) const;

    SimGrid refined(std::size_t factor) const;
    SimGrid coarsened(std::size_t factor) const;

    friend bool operator==(const SimGrid&, const SimGrid&) = default;

private:
    SimGrid(double horizon, std::size_t steps);

    double horizon_ = 1.0;
    std::size_t steps_ = 1000;
    double dt_ = 1e-3;
};

/// Brownian and Poisson increments of one path on a grid.
struct DrivingNoise {
    SimGrid grid;
    std::vector<double> brownian;          ///< dB_n ~ N(0, dt)
    std::vector<std::uint32_t> poisson;    ///< dN_n ~ Poisson(lambda dt)
    double lambda = 0.0;
    std::uint64_t seed = 0;
    std::uint64_t stream_id = 0;

    std::uint64_t total_jumps() const;

    friend bool operator==(const DrivingNoise&, const DrivingNoise&) = default;
};

/// How a Monte Carlo ensemble is drawn. With refine > 1 every path's noise is generated on a
/// grid `refine` times finer and aggregated, so runs at dt and dt/refine share one realization.
struct Ensemble {
    std::size_t n_paths = 1000;
    std::uint64_t seed = 1;
    std::size_t refine = 1;
    unsigned threads = 0;
};

/// Increments for path `path_index`, a pure function of (grid, lambda, seed, path_index).
DrivingNoise generate_noise(const SimGrid& grid, double lambda, std::uint64_t seed, std::uint64_t path_index);

/// Sums each run of `factor` consecutive increments. Throws std::invalid_argument when
/// factor is zero or does not divide the step count.
DrivingNoise coarsen(const DrivingNoise& noise, std::size_t factor);

/// Noise of path `path_index` of an ensemble on `grid` (honouring Ensemble::refine).
DrivingNoise ensemble_noise(const SimGrid& grid, double lambda, const Ensemble& ensemble, std::uint64_t path_index);

struct ModulusCheck {
    EstimateWithCI estimate;
    double bound = 0.0;  ///< (256/27) T dt
    bool within_bound = false;
};

/// Doob-inequality bound (256/27) T dt on the expected maximal fourth power of the
/// within-step Brownian oscillation.
double brownian_modulus_bound(const SimGrid& grid);

/// Monte Carlo estimate of E[max_n sup_{t in [t_n, t_{n+1}]} |B(t) - B(t_n)|^4], resolving each
/// step with `substeps` equispaced Brownian points. Requires n_paths >= 100.
ModulusCheck brownian_modulus_check(const SimGrid& grid, std::uint64_t seed, std::size_t n_paths,
                                    unsigned threads = 0, std::size_t substeps = 16);

/// Version-tagged little-endian container for noise ensembles, optionally with the EM values
/// simulated from them.
struct NoiseArchive {
    static constexpr std::uint32_t kVersion = 1;

    std::uint64_t seed = 0;
    double lambda = 0.0;
    SimGrid grid;
    std::vector<DrivingNoise> paths;
    /// Either empty or one array of steps()+1 values per path.
    std::vector<std::vector<double>> values;
};

void write_archive(std::ostream& out, const NoiseArchive& archive);
NoiseArchive read_archive(std::istream& in);
void write_archive(const std::filesystem::path& file, const NoiseArchive& archive);
NoiseArchive read_archive(const std::filesystem::path& file);

}  // namespace ajsim

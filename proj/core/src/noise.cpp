#include "ajsim/noise.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>
#include <type_traits>

#include "ajsim/parallel.hpp"
#include "ajsim/rng.hpp"

namespace ajsim {

SimGrid::SimGrid(double horizon, std::size_t steps)
    : horizon_(horizon), steps_(steps), dt_(horizon / static_cast<double>(steps)) {
    if (!(dt_ < 1.0)) throw std::invalid_argument("grid step must be < 1, got " + std::to_string(dt_));
}

SimGrid SimGrid::from_steps(double horizon, std::size_t n_steps) {
    if (!(std::isfinite(horizon) && horizon > 0.0)) throw std::invalid_argument("grid horizon must be > 0");
    if (n_steps == 0) throw std::invalid_argument("grid needs at least one step");
    return SimGrid(horizon, n_steps);
}

SimGrid SimGrid::from_dt(double horizon, double dt) {
    if (!(std::isfinite(horizon) && horizon > 0.0)) throw std::invalid_argument("grid horizon must be > 0");
    if (!(std::isfinite(dt) && dt > 0.0)) throw std::invalid_argument("grid step must be > 0");
    const double ratio = horizon / dt;
    const double n = std::round(ratio);
    if (n < 1.0 || std::fabs(n * dt - horizon) > 1e-9 * horizon) {
        throw std::invalid_argument("grid step " + std::to_string(dt) + " does not divide horizon " +
                                    std::to_string(horizon));
    }
    return SimGrid(horizon, static_cast<std::size_t>(n));
}

double SimGrid::time(std::size_t n) const {
    if (n >= steps_) return horizon_;
    return horizon_ * (static_cast<double>(n) / static_cast<double>(steps_));
}

std::size_t SimGrid::index_at(double t) const {
    if (!(t > 0.0)) return 0;
    if (t >= horizon_) return steps_;
    auto k = static_cast<std::size_t>(std::floor(t / dt_));
    k = std::min(k, steps_);
    while (k > 0 && time(k) > t) --k;
    while (k < steps_ && time(k + 1) <= t) ++k;
    return k;
}

SimGrid SimGrid::refined(std::size_t factor) const {
    if (factor == 0) throw std::invalid_argument("refinement factor must be positive");
    return SimGrid(horizon_, steps_ * factor);
}

SimGrid SimGrid::coarsened(std::size_t factor) const {
    if (factor == 0 || steps_ % factor != 0) {
        throw std::invalid_argument("coarsening factor " + std::to_string(factor) + " does not divide " +
                                    std::to_string(steps_) + " steps");
    }
    return SimGrid(horizon_, steps_ / factor);
}

std::uint64_t DrivingNoise::total_jumps() const {
    std::uint64_t total = 0;
    for (auto k : poisson) total += k;
    return total;
}

DrivingNoise generate_noise(const SimGrid& grid, double lambda, std::uint64_t seed, std::uint64_t path_index) {
    if (!(lambda >= 0.0 && std::isfinite(lambda))) throw std::invalid_argument("jump intensity must be >= 0");
    DrivingNoise noise;
    noise.grid = grid;
    noise.lambda = lambda;
    noise.seed = seed;
    noise.stream_id = path_index;
    const std::size_t n = grid.steps();
    noise.brownian.resize(n);
    noise.poisson.assign(n, 0);

    const double scale = std::sqrt(grid.dt());
    PhiloxStream normals(seed, path_index, StreamTag::brownian);
    for (auto& db : noise.brownian) db = scale * normals.normal();

    if (lambda > 0.0) {
        const double mean = lambda * grid.dt();
        PhiloxStream counts(seed, path_index, StreamTag::poisson);
        for (auto& dn : noise.poisson) dn = counts.poisson(mean);
    }
    return noise;
}

DrivingNoise coarsen(const DrivingNoise& noise, std::size_t factor) {
    if (factor == 0) throw std::invalid_argument("coarsening factor must be positive");
    if (factor == 1) return noise;
    DrivingNoise out;
    out.grid = noise.grid.coarsened(factor);
    out.lambda = noise.lambda;
    out.seed = noise.seed;
    out.stream_id = noise.stream_id;
    const std::size_t n = out.grid.steps();
    out.brownian.resize(n);
    out.poisson.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        double db = 0.0;
        std::uint32_t dn = 0;
        for (std::size_t j = i * factor; j < (i + 1) * factor; ++j) {
            db += noise.brownian[j];
            dn += noise.poisson[j];
        }
        out.brownian[i] = db;
        out.poisson[i] = dn;
    }
    return out;
}

DrivingNoise ensemble_noise(const SimGrid& grid, double lambda, const Ensemble& ensemble, std::uint64_t path_index) {
    if (ensemble.refine <= 1) return generate_noise(grid, lambda, ensemble.seed, path_index);
    return coarsen(generate_noise(grid.refined(ensemble.refine), lambda, ensemble.seed, path_index), ensemble.refine);
}

double brownian_modulus_bound(const SimGrid& grid) { return 256.0 / 27.0 * grid.horizon() * grid.dt(); }

ModulusCheck brownian_modulus_check(const SimGrid& grid, std::uint64_t seed, std::size_t n_paths, unsigned threads,
                                    std::size_t substeps) {
    if (n_paths < 100) throw std::invalid_argument("modulus check needs at least 100 paths");
    if (substeps == 0) throw std::invalid_argument("modulus check needs at least one substep");
    std::vector<double> samples(n_paths);
    const double scale = std::sqrt(grid.dt() / static_cast<double>(substeps));
    parallel_for(n_paths, threads, [&](std::size_t path) {
        PhiloxStream normals(seed, path, StreamTag::modulus);
        double worst = 0.0;
        for (std::size_t n = 0; n < grid.steps(); ++n) {
            double b = 0.0;
            for (std::size_t k = 0; k < substeps; ++k) {
                b += scale * normals.normal();
                worst = std::max(worst, std::fabs(b));
            }
        }
        const double sq = worst * worst;
        samples[path] = sq * sq;
    });
    ModulusCheck check;
    check.estimate = estimate_mean(samples);
    check.bound = brownian_modulus_bound(grid);
    check.within_bound = check.estimate.point <= check.bound + 3.0 * check.estimate.std_error;
    return check;
}

// ---------------------------------------------------------------------------
// Archive

namespace {

constexpr std::array<char, 4> kMagic{'A', 'J', 'S', 'N'};
constexpr std::uint32_t kHasValues = 1u;

template <class T>
void put_le(std::ostream& out, T value) {
    static_assert(std::is_integral_v<T> && std::is_unsigned_v<T>);
    std::array<char, sizeof(T)> bytes{};
    for (std::size_t i = 0; i < sizeof(T); ++i) bytes[i] = static_cast<char>((value >> (8 * i)) & 0xFFu);
    out.write(bytes.data(), bytes.size());
}

void put_f64(std::ostream& out, double v) {
    std::uint64_t bits = 0;
    std::memcpy(&bits, &v, sizeof bits);
    put_le(out, bits);
}

template <class T>
T get_le(std::istream& in) {
    std::array<unsigned char, sizeof(T)> bytes{};
    in.read(reinterpret_cast<char*>(bytes.data()), bytes.size());
    if (!in) throw std::runtime_error("noise archive truncated");
    T v = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) v |= static_cast<T>(bytes[i]) << (8 * i);
    return v;
}

double get_f64(std::istream& in) {
    const auto bits = get_le<std::uint64_t>(in);
    double v = 0.0;
    std::memcpy(&v, &bits, sizeof v);
    return v;
}

}  // namespace

void write_archive(std::ostream& out, const NoiseArchive& archive) {
    const bool with_values = !archive.values.empty();
    if (with_values && archive.values.size() != archive.paths.size()) {
        throw std::invalid_argument("archive value arrays must match path count");
    }
    out.write(kMagic.data(), kMagic.size());
    put_le<std::uint32_t>(out, NoiseArchive::kVersion);
    put_le<std::uint32_t>(out, with_values ? kHasValues : 0u);
    put_le<std::uint32_t>(out, 0u);
    put_le<std::uint64_t>(out, archive.seed);
    put_f64(out, archive.lambda);
    put_f64(out, archive.grid.horizon());
    put_le<std::uint64_t>(out, archive.grid.steps());
    put_le<std::uint64_t>(out, archive.paths.size());
    const std::size_t n = archive.grid.steps();
    for (std::size_t p = 0; p < archive.paths.size(); ++p) {
        const auto& path = archive.paths[p];
        if (path.brownian.size() != n || path.poisson.size() != n) {
            throw std::invalid_argument("archive path does not match archive grid");
        }
        put_le<std::uint64_t>(out, path.stream_id);
        for (double db : path.brownian) put_f64(out, db);
        for (auto dn : path.poisson) put_le<std::uint32_t>(out, dn);
        if (with_values) {
            if (archive.values[p].size() != n + 1) throw std::invalid_argument("archive values must have steps+1 entries");
            for (double v : archive.values[p]) put_f64(out, v);
        }
    }
    if (!out) throw std::runtime_error("failed writing noise archive");
}

NoiseArchive read_archive(std::istream& in) {
    std::array<char, 4> magic{};
    in.read(magic.data(), magic.size());
    if (!in || magic != kMagic) throw std::runtime_error("not a noise archive");
    const auto version = get_le<std::uint32_t>(in);
    if (version != NoiseArchive::kVersion) {
        throw std::runtime_error("unsupported noise archive version " + std::to_string(version));
    }
    const auto flags = get_le<std::uint32_t>(in);
    (void)get_le<std::uint32_t>(in);
    NoiseArchive archive;
    archive.seed = get_le<std::uint64_t>(in);
    archive.lambda = get_f64(in);
    const double horizon = get_f64(in);
    const auto steps = get_le<std::uint64_t>(in);
    const auto n_paths = get_le<std::uint64_t>(in);
    archive.grid = SimGrid::from_steps(horizon, steps);
    archive.paths.resize(n_paths);
    if (flags & kHasValues) archive.values.resize(n_paths);
    for (std::uint64_t p = 0; p < n_paths; ++p) {
        auto& path = archive.paths[p];
        path.grid = archive.grid;
        path.lambda = archive.lambda;
        path.seed = archive.seed;
        path.stream_id = get_le<std::uint64_t>(in);
        path.brownian.resize(steps);
        path.poisson.resize(steps);
        for (auto& db : path.brownian) db = get_f64(in);
        for (auto& dn : path.poisson) dn = get_le<std::uint32_t>(in);
        if (flags & kHasValues) {
            archive.values[p].resize(steps + 1);
            for (auto& v : archive.values[p]) v = get_f64(in);
        }
    }
    return archive;
}

void write_archive(const std::filesystem::path& file, const NoiseArchive& archive) {
    std::ofstream out(file, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + file.string());
    write_archive(out, archive);
}

NoiseArchive read_archive(const std::filesystem::path& file) {
    std::ifstream in(file, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + file.string());
    return read_archive(in);
}

}  // namespace ajsim

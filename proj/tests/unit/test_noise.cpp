#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <sstream>
#include <vector>

#include "ajsim/noise.hpp"

using namespace ajsim;

namespace {

DrivingNoise handmade(std::vector<double> db, std::vector<std::uint32_t> dn) {
    DrivingNoise n;
    n.grid = SimGrid::from_steps(1.0, db.size());
    n.brownian = std::move(db);
    n.poisson = std::move(dn);
    n.lambda = 1.0;
    return n;
}

// Kolmogorov-Smirnov distance of a sample against the standard normal CDF.
double ks_normal(std::vector<double> x) {
    std::sort(x.begin(), x.end());
    const double n = static_cast<double>(x.size());
    double d = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double cdf = 0.5 * std::erfc(-x[i] / std::sqrt(2.0));
        d = std::max({d, cdf - static_cast<double>(i) / n, static_cast<double>(i + 1) / n - cdf});
    }
    return d;
}

}  // namespace

TEST_CASE("grid construction") {
    const auto g = SimGrid::from_dt(1.0, 0.01);
    CHECK(g.steps() == 100);
    CHECK(g.time(0) == 0.0);
    CHECK(g.time(100) == 1.0);
    CHECK(std::fabs(g.steps() * g.dt() - g.horizon()) <= 4e-16);
    CHECK(g.index_at(0.5) == 50);
    CHECK(g.index_at(g.time(37)) == 37);
    CHECK(g.index_at(g.time(37) + 0.999 * g.dt()) == 37);
    CHECK(g.index_at(2.0) == 100);
    CHECK_THROWS_AS(SimGrid::from_dt(1.0, 0.3), std::invalid_argument);
    CHECK_THROWS_AS(SimGrid::from_dt(2.0, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(SimGrid::from_steps(0.0, 10), std::invalid_argument);
    CHECK_THROWS_AS(SimGrid::from_steps(1.0, 0), std::invalid_argument);
    CHECK(SimGrid::from_dt(1.0, 0.1).refined(8).steps() == 80);
    CHECK(SimGrid::from_dt(1.0, 0.1).coarsened(5).steps() == 2);
    CHECK_THROWS_AS(SimGrid::from_dt(1.0, 0.1).coarsened(3), std::invalid_argument);
}

TEST_CASE("zero intensity gives no jumps") {
    const auto g = SimGrid::from_dt(2.0, 0.01);
    for (std::uint64_t seed : {1u, 99u}) {
        const auto n = generate_noise(g, 0.0, seed, 3);
        CHECK(std::all_of(n.poisson.begin(), n.poisson.end(), [](auto k) { return k == 0; }));
        CHECK(n.brownian.size() == 200);
    }
}

TEST_CASE("same seed and path replay bit-identically") {
    const auto g = SimGrid::from_dt(1.0, 0.001);
    const auto a = generate_noise(g, 3.0, 5, 17);
    const auto b = generate_noise(g, 3.0, 5, 17);
    CHECK(a == b);
    CHECK(generate_noise(g, 3.0, 5, 18).brownian != a.brownian);
    CHECK(generate_noise(g, 3.0, 6, 17).brownian != a.brownian);
    // The Brownian stream does not depend on the jump intensity.
    CHECK(generate_noise(g, 0.0, 5, 17).brownian == a.brownian);
}

TEST_CASE("poisson counts over the horizon have mean and variance lambda T") {
    const auto g = SimGrid::from_dt(1.0, 0.001);
    const std::size_t n_paths = 100000;
    std::vector<double> totals(n_paths);
    double incr_sum = 0.0;
    for (std::size_t i = 0; i < n_paths; ++i) {
        const auto n = generate_noise(g, 2.0, 2024, i);
        totals[i] = static_cast<double>(n.total_jumps());
        incr_sum += n.poisson[0];
    }
    double mean = 0.0;
    for (double t : totals) mean += t;
    mean /= n_paths;
    double var = 0.0;
    for (double t : totals) var += (t - mean) * (t - mean);
    var /= (n_paths - 1);
    // Poisson(2): Var(mean) = 2 / n, Var(sample variance) ~ (mu4 - sigma^4) / n = (2 + 3*4 - 4) / n.
    CHECK(std::fabs(mean - 2.0) < 3.0 * std::sqrt(2.0 / n_paths));
    CHECK(std::fabs(var - 2.0) < 3.0 * std::sqrt(10.0 / n_paths));

    const double lam_dt = 2.0 * g.dt();
    CHECK(std::fabs(incr_sum / n_paths - lam_dt) < 4.0 * std::sqrt(lam_dt / n_paths));
}

TEST_CASE("normalised Brownian increments pass Kolmogorov-Smirnov at 0.1%") {
    const auto g = SimGrid::from_dt(1.0, 0.01);
    const std::size_t n_paths = 100000;
    std::vector<double> z(n_paths);
    const double scale = 1.0 / std::sqrt(g.dt());
    for (std::size_t i = 0; i < n_paths; ++i) z[i] = generate_noise(g, 0.0, 77, i).brownian[i % g.steps()] * scale;
    CHECK(ks_normal(z) < 1.9495 / std::sqrt(static_cast<double>(n_paths)));

    std::vector<double> along(generate_noise(SimGrid::from_steps(0.5, 100000), 0.0, 78, 0).brownian);
    for (auto& x : along) x /= std::sqrt(0.5 / 100000);
    CHECK(ks_normal(along) < 1.9495 / std::sqrt(100000.0));
}

TEST_CASE("coarsening examples") {
    const auto fine = handmade({0.1, -0.2, 0.3, 0.05}, {0, 2, 1, 0});
    CHECK(coarsen(fine, 1) == fine);
    const auto coarse = coarsen(fine, 2);
    REQUIRE(coarse.brownian.size() == 2);
    CHECK(coarse.brownian[0] == doctest::Approx(-0.1).epsilon(1e-15));
    CHECK(coarse.brownian[1] == doctest::Approx(0.35).epsilon(1e-15));
    CHECK(coarse.poisson == std::vector<std::uint32_t>{2, 1});
    CHECK(coarse.grid.steps() == 2);
    CHECK(coarse.grid.dt() == 0.5);
    CHECK_THROWS_AS(coarsen(fine, 3), std::invalid_argument);
    CHECK_THROWS_AS(coarsen(fine, 0), std::invalid_argument);
}

TEST_CASE("coarsening composes and preserves jump totals") {
    const auto fine = generate_noise(SimGrid::from_steps(1.0, 240), 5.0, 3, 0);
    for (std::size_t f : {1u, 2u, 3u, 4u, 5u, 6u, 8u, 12u, 120u}) CHECK(coarsen(fine, f).total_jumps() == fine.total_jumps());
    const auto two_step = coarsen(coarsen(fine, 4), 3);
    const auto one_step = coarsen(fine, 12);
    CHECK(two_step.poisson == one_step.poisson);
    for (std::size_t i = 0; i < one_step.brownian.size(); ++i) {
        CHECK(two_step.brownian[i] == doctest::Approx(one_step.brownian[i]).epsilon(1e-14));
    }
}

TEST_CASE("ensemble refinement drives the coarse grid with aggregated fine noise") {
    const auto g = SimGrid::from_dt(1.0, 0.01);
    Ensemble e;
    e.seed = 4;
    e.refine = 8;
    const auto coupled = ensemble_noise(g, 1.5, e, 9);
    const auto fine = generate_noise(g.refined(8), 1.5, 4, 9);
    CHECK(coupled == coarsen(fine, 8));
    CHECK(coupled.grid == g);
}

TEST_CASE("brownian modulus") {
    CHECK(brownian_modulus_bound(SimGrid::from_dt(1.0, 0.01)) == doctest::Approx(0.0948148148).epsilon(1e-9));
    CHECK_THROWS_AS(brownian_modulus_check(SimGrid::from_dt(1.0, 0.01), 1, 99), std::invalid_argument);

    const auto coarse = brownian_modulus_check(SimGrid::from_dt(1.0, 0.01), 8, 10000);
    const auto fine = brownian_modulus_check(SimGrid::from_dt(1.0, 0.005), 8, 10000);
    CHECK(coarse.within_bound);
    CHECK(fine.within_bound);
    const double ratio = fine.estimate.point / coarse.estimate.point;
    CAPTURE(ratio);
    CHECK(ratio >= 0.3);
    CHECK(ratio <= 0.8);
}

TEST_CASE("archive round trip") {
    NoiseArchive a;
    a.seed = 123;
    a.lambda = 0.7;
    a.grid = SimGrid::from_dt(0.5, 0.05);
    for (std::uint64_t i = 0; i < 3; ++i) a.paths.push_back(generate_noise(a.grid, a.lambda, a.seed, i));

    std::stringstream buf;
    write_archive(buf, a);
    const auto b = read_archive(buf);
    CHECK(b.seed == 123);
    CHECK(b.lambda == 0.7);
    CHECK(b.grid == a.grid);
    REQUIRE(b.paths.size() == 3);
    CHECK(b.paths[2] == a.paths[2]);
    CHECK(b.values.empty());

    a.values.assign(3, std::vector<double>(a.grid.steps() + 1, 1.25));
    const auto file = std::filesystem::temp_directory_path() / "ajsim_test_archive.bin";
    write_archive(file, a);
    const auto c = read_archive(file);
    CHECK(c.values == a.values);
    std::filesystem::remove(file);

    std::stringstream junk("not an archive");
    CHECK_THROWS(read_archive(junk));
}

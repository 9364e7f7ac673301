#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "ajsim/rng.hpp"

using namespace ajsim;

TEST_CASE("philox4x32-10 known answers") {
    using C = Philox4x32::Counter;
    using K = Philox4x32::Key;
    CHECK(Philox4x32::generate(C{0, 0, 0, 0}, K{0, 0}) == C{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u});
    CHECK(Philox4x32::generate(C{0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu}, K{0xffffffffu, 0xffffffffu}) ==
          C{0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu});
    CHECK(Philox4x32::generate(C{0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u}, K{0xa4093822u, 0x299f31d0u}) ==
          C{0xd16cfe09u, 0x94fdccebu, 0x5001e420u, 0x24126ea1u});
}

TEST_CASE("streams are reproducible and separated") {
    PhiloxStream a(9, 3, StreamTag::brownian);
    PhiloxStream b(9, 3, StreamTag::brownian);
    for (int i = 0; i < 100; ++i) CHECK(a.next_u32() == b.next_u32());

    auto first = [](std::uint64_t seed, std::uint64_t path, StreamTag tag) {
        PhiloxStream s(seed, path, tag);
        return s.next_u64();
    };
    const auto base = first(9, 3, StreamTag::brownian);
    CHECK(first(10, 3, StreamTag::brownian) != base);
    CHECK(first(9, 4, StreamTag::brownian) != base);
    CHECK(first(9, 3, StreamTag::poisson) != base);
    CHECK(first(9, 3ull << 32, StreamTag::brownian) != first(9, 0, StreamTag::brownian));
}

TEST_CASE("offset skips whole blocks") {
    PhiloxStream a(1, 0, StreamTag::bridge);
    for (int i = 0; i < 8; ++i) a.next_u32();
    PhiloxStream b(1, 0, StreamTag::bridge, 2);
    for (int i = 0; i < 8; ++i) CHECK(a.next_u32() == b.next_u32());
}

TEST_CASE("uniforms stay inside the open unit interval with the right mean") {
    PhiloxStream s(42, 0, StreamTag::brownian);
    double sum = 0.0;
    const int n = 200000;
    for (int i = 0; i < n; ++i) {
        const double u = s.uniform();
        REQUIRE(u > 0.0);
        REQUIRE(u < 1.0);
        sum += u;
    }
    const double se = std::sqrt(1.0 / 12.0 / n);
    CHECK(std::fabs(sum / n - 0.5) < 4.0 * se);
}

TEST_CASE("normal moments") {
    PhiloxStream s(7, 1, StreamTag::brownian);
    const int n = 200000;
    double m1 = 0.0;
    double m2 = 0.0;
    double m4 = 0.0;
    for (int i = 0; i < n; ++i) {
        const double z = s.normal();
        m1 += z;
        m2 += z * z;
        m4 += z * z * z * z;
    }
    m1 /= n;
    m2 /= n;
    m4 /= n;
    CHECK(std::fabs(m1) < 4.0 / std::sqrt(n));
    CHECK(std::fabs(m2 - 1.0) < 4.0 * std::sqrt(2.0 / n));
    CHECK(std::fabs(m4 - 3.0) < 4.0 * std::sqrt(96.0 / n));
}

TEST_CASE("poisson mean and variance") {
    for (double mean : {0.002, 0.5, 3.0, 40.0}) {
        PhiloxStream s(11, 0, StreamTag::poisson);
        const int n = 100000;
        double sum = 0.0;
        double sq = 0.0;
        for (int i = 0; i < n; ++i) {
            const double k = s.poisson(mean);
            sum += k;
            sq += k * k;
        }
        const double m = sum / n;
        const double v = sq / n - m * m;
        CAPTURE(mean);
        CHECK(std::fabs(m - mean) < 4.0 * std::sqrt(mean / n));
        // Var of the sample variance for Poisson: (mean + 2 mean^2) / n.
        CHECK(std::fabs(v - mean) < 4.0 * std::sqrt((mean + 2.0 * mean * mean) / n));
    }
    PhiloxStream s(1, 0, StreamTag::poisson);
    CHECK(s.poisson(0.0) == 0u);
}

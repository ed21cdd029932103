#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdint>
#include <vector>

#include "zeronoise/rng.hpp"

using zn::Rng;
using zn::RngCursor;

TEST_CASE("frozen known answers") {
    // Pinned from this implementation; any platform or refactor drift in the
    // generator invalidates every seeded artifact, so these must never move.
    Rng a(0, 0);
    CHECK(a.next_u32() == 1713891541u);
    CHECK(a.next_u32() == 3781805453u);
    CHECK(a.next_u32() == 3159862348u);
    CHECK(a.next_u32() == 2600524760u);
    CHECK(a.next_u32() == 4175744164u);

    Rng b(0xdeadbeefcafef00dULL, 42);
    CHECK(b.next_u32() == 3008820926u);
    CHECK(b.next_u32() == 4212429439u);
    CHECK(b.next_u32() == 3472379864u);

    Rng c(1, 2);
    CHECK(c.next_u64() == 16659946211019441619ULL);

    Rng d(7, 7);
    CHECK(d.uniform01() == doctest::Approx(0.48102772628023649).epsilon(1e-16));
    CHECK(d.uniform01() == doctest::Approx(0.30371851190107302).epsilon(1e-16));
}

TEST_CASE("same key same stream replays exactly") {
    Rng a(123456789, 17);
    Rng b(123456789, 17);
    for (int i = 0; i < 1000; ++i) CHECK(a.next_u32() == b.next_u32());
}

TEST_CASE("streams and seeds decorrelate") {
    Rng base(99, 0);
    Rng other_stream(99, 1);
    Rng other_seed(100, 0);
    int same_stream = 0;
    int same_seed = 0;
    for (int i = 0; i < 256; ++i) {
        const std::uint32_t v = base.next_u32();
        if (v == other_stream.next_u32()) ++same_stream;
        if (v == other_seed.next_u32()) ++same_seed;
    }
    CHECK(same_stream == 0);
    CHECK(same_seed == 0);
}

TEST_CASE("cursor resume is bit exact at every word offset") {
    for (int prefix : {0, 1, 2, 3, 4, 5, 6, 7, 997}) {
        Rng full(0xabcdef, 3);
        std::vector<std::uint32_t> expect;
        for (int i = 0; i < prefix + 64; ++i) expect.push_back(full.next_u32());

        Rng head(0xabcdef, 3);
        for (int i = 0; i < prefix; ++i) head.next_u32();
        const RngCursor cur = head.cursor();

        Rng tail(0xabcdef, 3, cur);
        for (int i = prefix; i < prefix + 64; ++i) {
            CHECK(tail.next_u32() == expect[static_cast<std::size_t>(i)]);
        }
    }
}

TEST_CASE("cursor advances word then block") {
    Rng r(5, 5);
    CHECK(r.cursor() == RngCursor{0, 0});
    r.next_u32();
    CHECK(r.cursor() == RngCursor{0, 1});
    r.next_u32();
    r.next_u32();
    r.next_u32();
    CHECK(r.cursor() == RngCursor{1, 0});
    r.next_u64();  // two words
    CHECK(r.cursor() == RngCursor{1, 2});
}

TEST_CASE("uniform01 range and moments") {
    Rng r(2024, 0);
    const int n = 1 << 20;
    double sum = 0.0;
    double sumsq = 0.0;
    std::vector<int> bins(64, 0);
    for (int i = 0; i < n; ++i) {
        const double x = r.uniform01();
        REQUIRE(x >= 0.0);
        REQUIRE(x < 1.0);
        sum += x;
        sumsq += x * x;
        ++bins[static_cast<std::size_t>(x * 64.0)];
    }
    const double mean = sum / n;
    const double var = sumsq / n - mean * mean;
    // 5 sigma bands on the sample mean and variance of U[0,1).
    CHECK(std::fabs(mean - 0.5) < 5.0 * std::sqrt(1.0 / 12.0 / n));
    CHECK(std::fabs(var - 1.0 / 12.0) < 5.0 * std::sqrt(1.0 / 180.0 / n));

    double chi2 = 0.0;
    const double expected = static_cast<double>(n) / 64.0;
    for (int count : bins) {
        const double d = count - expected;
        chi2 += d * d / expected;
    }
    // 63 degrees of freedom: mean 63, sd ~11.2; accept a generous 5 sigma.
    CHECK(chi2 > 63.0 - 56.0);
    CHECK(chi2 < 63.0 + 56.0);
}

TEST_CASE("uniform interval endpoints") {
    Rng r(11, 4);
    for (int i = 0; i < 1000; ++i) {
        const double x = r.uniform(-0.25, 0.75);
        CHECK(x >= -0.25);
        CHECK(x < 0.75);
    }
}

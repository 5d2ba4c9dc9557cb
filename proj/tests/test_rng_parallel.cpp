#include <doctest.h>

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "p2ad/parallel.hpp"
#include "p2ad/rng.hpp"

using namespace p2ad;

TEST_CASE("rng streams are deterministic and independent") {
    Rng a(42), b(42);
    for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());

    // Different mixed seeds should not collide on a short prefix.
    Rng c(mix_seed(42, 0)), d(mix_seed(42, 1));
    bool any_diff = false;
    for (int i = 0; i < 4; ++i)
        if (c.next_u64() != d.next_u64()) any_diff = true;
    CHECK(any_diff);
}

TEST_CASE("mix_seed spreads consecutive streams") {
    std::vector<std::uint64_t> seen;
    for (std::uint64_t s = 0; s < 1000; ++s) seen.push_back(mix_seed(7, s));
    std::sort(seen.begin(), seen.end());
    CHECK(std::adjacent_find(seen.begin(), seen.end()) == seen.end());
}

TEST_CASE("uniform_int covers the range inclusively") {
    Rng rng(1);
    std::vector<int> counts(5, 0);
    for (int i = 0; i < 10000; ++i) {
        const int v = rng.uniform_int(2, 6);
        REQUIRE(v >= 2);
        REQUIRE(v <= 6);
        ++counts[static_cast<std::size_t>(v - 2)];
    }
    for (int c : counts) CHECK(c > 1600);  // ~2000 expected each
}

TEST_CASE("uniform stays in the half-open interval") {
    Rng rng(2);
    for (int i = 0; i < 10000; ++i) {
        const double v = rng.uniform(-1.5, 2.5);
        CHECK(v >= -1.5);
        CHECK(v < 2.5);
    }
}

TEST_CASE("shuffle is a permutation and seed-stable") {
    std::vector<int> x(50);
    std::iota(x.begin(), x.end(), 0);
    std::vector<int> y = x;
    Rng r1(9), r2(9);
    r1.shuffle(x);
    r2.shuffle(y);
    CHECK(x == y);
    std::vector<int> sorted = x;
    std::sort(sorted.begin(), sorted.end());
    for (int i = 0; i < 50; ++i) CHECK(sorted[static_cast<std::size_t>(i)] == i);
}

TEST_CASE("parallel_for covers every index exactly once") {
    const std::size_t n = 1000;
    std::vector<std::atomic<int>> hits(n);
    parallel_for(n, [&](std::size_t i) { hits[i].fetch_add(1); });
    for (const auto& h : hits) CHECK(h.load() == 1);
}

TEST_CASE("parallel_for result is independent of thread count") {
    const std::size_t n = 257;
    auto run = [&] {
        std::vector<double> out(n);
        parallel_for(n, [&](std::size_t i) {
            Rng rng(mix_seed(5, i));
            out[i] = rng.next_double();
        });
        return out;
    };
    setenv("P2AD_THREADS", "1", 1);
    const auto serial = run();
    setenv("P2AD_THREADS", "7", 1);
    const auto parallel = run();
    unsetenv("P2AD_THREADS");
    CHECK(serial == parallel);
}

TEST_CASE("effective_thread_count honors the env var") {
    setenv("P2AD_THREADS", "3", 1);
    CHECK(effective_thread_count() == 3);
    setenv("P2AD_THREADS", "0", 1);
    CHECK(effective_thread_count() == 1);
    setenv("P2AD_THREADS", "junk", 1);
    CHECK(effective_thread_count() == 1);
    unsetenv("P2AD_THREADS");
    CHECK(effective_thread_count() >= 1);
}

TEST_CASE("parallel_for propagates exceptions") {
    setenv("P2AD_THREADS", "4", 1);
    CHECK_THROWS_AS(
        parallel_for(100, [](std::size_t i) {
            if (i == 57) throw std::runtime_error("boom");
        }),
        std::runtime_error);
    unsetenv("P2AD_THREADS");
}

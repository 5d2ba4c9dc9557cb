#include <doctest.h>

#include <cmath>

#include "p2ad/errors.hpp"
#include "p2ad/pow2.hpp"
#include "p2ad/rng.hpp"
#include "support/oracles.hpp"

using namespace p2ad;

TEST_CASE("quantize_pow2 hand cases") {
    // 0.75 is exactly between 0.5 and 1.0; ties keep the smaller exponent.
    CHECK(quantize_pow2(0.75) == Pow2Weight{1, -1});
    CHECK(quantize_pow2(-0.75) == Pow2Weight{-1, -1});
    CHECK(quantize_pow2(1.0) == Pow2Weight{1, 0});
    CHECK(quantize_pow2(-8.0) == Pow2Weight{-1, 3});
    CHECK(quantize_pow2(0.7) == Pow2Weight{1, -1});   // closer to 0.5 than 1.0
    CHECK(quantize_pow2(0.8) == Pow2Weight{1, 0});    // closer to 1.0
    CHECK(quantize_pow2(0.0) == Pow2Weight{0, 0});
}

TEST_CASE("quantize_pow2 clamps to the exponent range") {
    // Above 2^3 the best representable stays 2^3.
    CHECK(quantize_pow2(100.0) == Pow2Weight{1, 3});
    CHECK(quantize_pow2(-100.0) == Pow2Weight{-1, 3});
    // Halfway to the smallest magnitude: zero wins the tie.
    const double tiny_half = std::ldexp(1.0, -13);  // 2^-13 = 0.5 * 2^-12
    CHECK(quantize_pow2(tiny_half) == Pow2Weight{0, 0});
    // Just above the tie goes to the smallest exponent.
    CHECK(quantize_pow2(std::ldexp(1.1, -13)) == Pow2Weight{1, -12});
    // Well below underflows to zero.
    CHECK(quantize_pow2(1e-9) == Pow2Weight{0, 0});
}

TEST_CASE("quantize_pow2 rejects bad input") {
    CHECK_THROWS_AS(quantize_pow2(std::nan("")), ContractError);
    CHECK_THROWS_AS(quantize_pow2(1.0, 3, -3), ContractError);
}

TEST_CASE("quantize_pow2 agrees with exhaustive enumeration") {
    Rng rng(21);
    for (int i = 0; i < 20000; ++i) {
        double w = 0.0;
        switch (rng.uniform_int(0, 3)) {
            case 0: w = rng.uniform(-10.0, 10.0); break;
            case 1: w = rng.uniform(-0.01, 0.01); break;
            case 2: w = std::ldexp(rng.uniform(-1.0, 1.0), rng.uniform_int(-14, 5)); break;
            // Exact powers of two and exact midpoints stress the ties.
            case 3: {
                const int e = rng.uniform_int(-14, 4);
                const double base = std::ldexp(1.0, e);
                w = (rng.next_double() < 0.5 ? base : 1.5 * base) *
                    (rng.next_double() < 0.5 ? 1.0 : -1.0);
                break;
            }
        }
        const Pow2Weight got = quantize_pow2(w);
        const Pow2Weight want = oracles::quantize_pow2_enum(
            w, kDefaultWeightExpMin, kDefaultWeightExpMax);
        CAPTURE(w);
        CHECK(got == want);
    }
}

TEST_CASE("quantization error is bounded inside the covered range") {
    Rng rng(22);
    for (int i = 0; i < 5000; ++i) {
        const double w = rng.uniform(-8.0, 8.0);
        if (std::fabs(w) < std::ldexp(1.0, -11)) continue;  // underflow zone
        const Pow2Weight q = quantize_pow2(w);
        REQUIRE(q.sign != 0);
        // Inside [2^-11, 2^3] the octave grid keeps relative error <= 1/3.
        const double err = std::fabs(w - q.value());
        CHECK(err <= std::fabs(w) / 3.0 + 1e-15);
    }
}

TEST_CASE("Pow2Tensor quantize and alignment") {
    const std::vector<double> weights = {0.5, -0.25, 0.0, 4.0};
    const Pow2Tensor t = Pow2Tensor::quantize(weights, {4});
    CHECK(t.size() == 4);
    CHECK(t.at(0) == Pow2Weight{1, -1});
    CHECK(t.at(1) == Pow2Weight{-1, -2});
    CHECK(t.at(2) == Pow2Weight{0, 0});
    CHECK(t.at(3) == Pow2Weight{1, 2});
    CHECK(t.alignment() == 2);

    // All non-negative exponents need no alignment.
    const std::vector<double> big = {1.0, 2.0, 8.0};
    CHECK(Pow2Tensor::quantize(big, {3}).alignment() == 0);

    // Zeros do not contribute to alignment.
    const std::vector<double> zeros = {0.0, 0.0};
    CHECK(Pow2Tensor::quantize(zeros, {2}).alignment() == 0);

    CHECK_THROWS_AS(Pow2Tensor::quantize(weights, {3}), ContractError);
}

TEST_CASE("canonical zero carries exponent 0") {
    Rng rng(23);
    for (int i = 0; i < 1000; ++i) {
        const Pow2Weight q = quantize_pow2(rng.uniform(-1e-4, 1e-4));
        if (q.sign == 0) CHECK(q.exponent == 0);
    }
}

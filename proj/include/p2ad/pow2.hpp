#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

namespace p2ad {

inline constexpr int kDefaultWeightExpMin = -12;
inline constexpr int kDefaultWeightExpMax = 3;

// A weight restricted to {-1, 0, +1} * 2^exponent. Zero is canonical:
// sign == 0 implies exponent == 0.
struct Pow2Weight {
    std::int8_t sign = 0;      // -1, 0, +1
    std::int8_t exponent = 0;

    double value() const {
        return sign == 0 ? 0.0 : sign * std::ldexp(1.0, exponent);
    }

    bool operator==(const Pow2Weight&) const = default;
};

// Nearest representable weight by absolute error over sign in {-1,0,+1}
// and exponent in [exp_min, exp_max]. Exact ties go to the smaller
// exponent, with zero counting as smaller than any exponent.
Pow2Weight quantize_pow2(double w, int exp_min = kDefaultWeightExpMin,
                         int exp_max = kDefaultWeightExpMax);

// Flat tensor of pow2 weights, sign and exponent stored separately so the
// shift kernels stream them without unpacking.
struct Pow2Tensor {
    std::vector<int> shape;
    std::vector<std::int8_t> sign;
    std::vector<std::int8_t> exponent;

    std::size_t size() const { return sign.size(); }
    Pow2Weight at(std::size_t i) const { return {sign[i], exponent[i]}; }
    double value_at(std::size_t i) const { return at(i).value(); }

    // Smallest left shift that makes every stored exponent non-negative.
    int alignment() const;

    static Pow2Tensor quantize(std::span<const double> weights,
                               std::vector<int> shape,
                               int exp_min = kDefaultWeightExpMin,
                               int exp_max = kDefaultWeightExpMax);
};

}  // namespace p2ad

#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

namespace p2ad {

inline constexpr int kDefaultFracBits = 16;

// Saturate a wide intermediate to the int32 range. All fixed-point
// arithmetic clamps; nothing is allowed to wrap.
inline std::int32_t saturate_i32(std::int64_t v) {
    if (v > std::numeric_limits<std::int32_t>::max())
        return std::numeric_limits<std::int32_t>::max();
    if (v < std::numeric_limits<std::int32_t>::min())
        return std::numeric_limits<std::int32_t>::min();
    return static_cast<std::int32_t>(v);
}

// Round to the nearest multiple of 2^-frac_bits, half away from zero,
// saturating at the int32 range.
std::int32_t encode_fixed(double x, int frac_bits);

inline double decode_fixed(std::int32_t v, int frac_bits) {
    return std::ldexp(static_cast<double>(v), -frac_bits);
}

// Arithmetic shift right by s >= 0 rounding half away from zero. This is
// the one rounding rule in the integer pipeline; it matches encode_fixed
// so shift-accumulate layers and real-valued references agree exactly.
inline std::int64_t rounding_shift_right(std::int64_t v, int s) {
    if (s == 0) return v;
    const std::int64_t half = std::int64_t{1} << (s - 1);
    if (v >= 0) return (v + half) >> s;
    return -((-v + half) >> s);
}

// Fixed-point activation tensor: 32-bit scaled integers with a shared
// fractional-bit count. decoded value = data[i] / 2^frac_bits.
struct QTensor {
    std::vector<int> shape;
    int frac_bits = kDefaultFracBits;
    std::vector<std::int32_t> data;

    QTensor() = default;
    QTensor(std::vector<int> shape, int frac_bits);

    std::int64_t numel() const;
    double value_at(std::size_t i) const { return decode_fixed(data[i], frac_bits); }
};

QTensor to_fixed(std::span<const double> values, std::vector<int> shape,
                 int frac_bits = kDefaultFracBits);
std::vector<double> from_fixed(const QTensor& q);

}  // namespace p2ad

#include "p2ad/fixed_point.hpp"

#include <cmath>

#include "p2ad/errors.hpp"

namespace p2ad {

std::int32_t encode_fixed(double x, int frac_bits) {
    const double scaled = std::ldexp(x, frac_bits);
    // Saturate before llround can overflow.
    if (scaled >= static_cast<double>(std::numeric_limits<std::int32_t>::max()))
        return std::numeric_limits<std::int32_t>::max();
    if (scaled <= static_cast<double>(std::numeric_limits<std::int32_t>::min()))
        return std::numeric_limits<std::int32_t>::min();
    return saturate_i32(std::llround(scaled));  // llround: half away from zero
}

QTensor::QTensor(std::vector<int> shape_in, int frac_bits_in) {
    shape = std::move(shape_in);
    frac_bits = frac_bits_in;
    if (frac_bits < 0) throw ContractError("frac_bits must be non-negative");
    std::int64_t n = 1;
    for (int d : shape) {
        if (d <= 0) throw ContractError("tensor dimensions must be positive");
        n *= d;
    }
    data.assign(static_cast<std::size_t>(n), 0);
}

std::int64_t QTensor::numel() const {
    std::int64_t n = 1;
    for (int d : shape) n *= d;
    return n;
}

QTensor to_fixed(std::span<const double> values, std::vector<int> shape,
                 int frac_bits) {
    QTensor q(std::move(shape), frac_bits);
    if (static_cast<std::int64_t>(values.size()) != q.numel())
        throw ContractError("to_fixed: value count does not match shape");
    for (std::size_t i = 0; i < values.size(); ++i)
        q.data[i] = encode_fixed(values[i], frac_bits);
    return q;
}

std::vector<double> from_fixed(const QTensor& q) {
    std::vector<double> out(q.data.size());
    for (std::size_t i = 0; i < q.data.size(); ++i)
        out[i] = decode_fixed(q.data[i], q.frac_bits);
    return out;
}

}  // namespace p2ad

#include "p2ad/pow2.hpp"

#include <cmath>
#include <utility>

#include "p2ad/errors.hpp"

namespace p2ad {

Pow2Weight quantize_pow2(double w, int exp_min, int exp_max) {
    if (exp_min > exp_max) throw ContractError("quantize_pow2: exp_min > exp_max");
    if (!std::isfinite(w)) throw ContractError("quantize_pow2: non-finite weight");
    if (w == 0.0) return Pow2Weight{0, 0};

    const std::int8_t sign = w > 0.0 ? std::int8_t{1} : std::int8_t{-1};
    const double mag = std::fabs(w);

    // frexp gives mag = m * 2^e with m in [0.5, 1), so the two nearest
    // representable exponents bracket log2(mag).
    int e = 0;
    (void)std::frexp(mag, &e);
    int lo = e - 1;  // 2^lo <= mag < 2^(lo+1)
    if (lo < exp_min) lo = exp_min;
    if (lo > exp_max) lo = exp_max;
    int hi = lo + 1 <= exp_max ? lo + 1 : exp_max;

    double best_err = std::fabs(mag - std::ldexp(1.0, lo));
    int best_exp = lo;
    const double err_hi = std::fabs(mag - std::ldexp(1.0, hi));
    // Ties keep the smaller exponent.
    if (err_hi < best_err) {
        best_err = err_hi;
        best_exp = hi;
    }
    // Zero is also a candidate; a tie keeps zero.
    if (mag <= best_err) return Pow2Weight{0, 0};
    return Pow2Weight{sign, static_cast<std::int8_t>(best_exp)};
}

Pow2Tensor Pow2Tensor::quantize(std::span<const double> weights,
                                std::vector<int> shape, int exp_min,
                                int exp_max) {
    Pow2Tensor t;
    t.shape = std::move(shape);
    std::int64_t n = 1;
    for (int d : t.shape) {
        if (d <= 0) throw ContractError("Pow2Tensor: dimensions must be positive");
        n *= d;
    }
    if (static_cast<std::int64_t>(weights.size()) != n)
        throw ContractError("Pow2Tensor: weight count does not match shape");
    t.sign.resize(weights.size());
    t.exponent.resize(weights.size());
    for (std::size_t i = 0; i < weights.size(); ++i) {
        const Pow2Weight q = quantize_pow2(weights[i], exp_min, exp_max);
        t.sign[i] = q.sign;
        t.exponent[i] = q.exponent;
    }
    return t;
}

int Pow2Tensor::alignment() const {
    int min_exp = 0;
    for (std::size_t i = 0; i < sign.size(); ++i)
        if (sign[i] != 0 && exponent[i] < min_exp) min_exp = exponent[i];
    return -min_exp;  // >= 0; shifting weights up by this makes every tap a left shift
}

}  // namespace p2ad

#include "support/oracles.hpp"

#include <algorithm>
#include <cmath>

#include "p2ad/errors.hpp"
#include "p2ad/shift_ops.hpp"

namespace oracles {

p2ad::L1Projection l1_projection_bisection(std::span<const double> x,
                                           double epsilon) {
    double l1 = 0.0, peak = 0.0;
    for (double v : x) {
        l1 += std::fabs(v);
        peak = std::max(peak, std::fabs(v));
    }
    p2ad::L1Projection result;
    if (l1 <= epsilon) {
        result.values.assign(x.begin(), x.end());
        result.theta = 0.0;
        return result;
    }
    // g(theta) = sum max(|x|-theta, 0) falls monotonically from ||x||_1
    // at 0 to 0 at max|x|; bisect to the theta where it crosses epsilon.
    double lo = 0.0, hi = peak;
    for (int iter = 0; iter < 200; ++iter) {
        const double mid = 0.5 * (lo + hi);
        double g = 0.0;
        for (double v : x) g += std::max(std::fabs(v) - mid, 0.0);
        if (g > epsilon)
            lo = mid;
        else
            hi = mid;
    }
    result.theta = 0.5 * (lo + hi);
    result.values = p2ad::soft_threshold(x, result.theta);
    return result;
}

p2ad::Pow2Weight quantize_pow2_enum(double w, int exp_min, int exp_max) {
    // Zero first so ties keep zero; exponents ascending so ties keep the
    // smaller exponent.
    p2ad::Pow2Weight best{0, 0};
    double best_err = std::fabs(w);
    for (int e = exp_min; e <= exp_max; ++e) {
        for (int s : {1, -1}) {
            const double err = std::fabs(w - s * std::ldexp(1.0, e));
            if (err < best_err) {
                best_err = err;
                best = p2ad::Pow2Weight{static_cast<std::int8_t>(s),
                                        static_cast<std::int8_t>(e)};
            }
        }
    }
    return best;
}

p2ad::QTensor conv2d_multiply_reference(const p2ad::QTensor& input,
                                        const p2ad::Pow2Tensor& weights,
                                        std::span<const std::int32_t> bias,
                                        int stride, int padding) {
    const int c_in = input.shape[0], h = input.shape[1], w = input.shape[2];
    const int c_out = weights.shape[0], k = weights.shape[2];
    const int out_h = p2ad::conv_output_extent(h, k, stride, padding);
    const int out_w = p2ad::conv_output_extent(w, k, stride, padding);
    p2ad::QTensor out({c_out, out_h, out_w}, input.frac_bits);
    for (int oc = 0; oc < c_out; ++oc) {
        for (int oy = 0; oy < out_h; ++oy) {
            for (int ox = 0; ox < out_w; ++ox) {
                double acc = static_cast<double>(bias[oc]);
                for (int ic = 0; ic < c_in; ++ic) {
                    for (int ky = 0; ky < k; ++ky) {
                        const int iy = oy * stride - padding + ky;
                        if (iy < 0 || iy >= h) continue;
                        for (int kx = 0; kx < k; ++kx) {
                            const int ix = ox * stride - padding + kx;
                            if (ix < 0 || ix >= w) continue;
                            const std::size_t ai =
                                (static_cast<std::size_t>(ic) * h + iy) * w + ix;
                            const std::size_t wi =
                                ((static_cast<std::size_t>(oc) * c_in + ic) * k + ky) * k +
                                kx;
                            acc += static_cast<double>(input.data[ai]) *
                                   weights.value_at(wi);
                        }
                    }
                }
                out.data[(static_cast<std::size_t>(oc) * out_h + oy) * out_w + ox] =
                    p2ad::saturate_i32(std::llround(acc));
            }
        }
    }
    return out;
}

p2ad::QTensor fc_multiply_reference(const p2ad::QTensor& input,
                                    const p2ad::Pow2Tensor& weights,
                                    std::span<const std::int32_t> bias) {
    const int out_n = weights.shape[0], in_n = weights.shape[1];
    p2ad::QTensor out({out_n}, input.frac_bits);
    for (int o = 0; o < out_n; ++o) {
        double acc = static_cast<double>(bias[o]);
        for (int i = 0; i < in_n; ++i)
            acc += static_cast<double>(input.data[i]) *
                   weights.value_at(static_cast<std::size_t>(o) * in_n + i);
        out.data[o] = p2ad::saturate_i32(std::llround(acc));
    }
    return out;
}

double auc_mann_whitney(std::span<const double> scores,
                        std::span<const int> labels) {
    double wins = 0.0;
    std::size_t pairs = 0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        if (labels[i] != 1) continue;
        for (std::size_t j = 0; j < scores.size(); ++j) {
            if (labels[j] != 0) continue;
            ++pairs;
            if (scores[i] > scores[j])
                wins += 1.0;
            else if (scores[i] == scores[j])
                wins += 0.5;
        }
    }
    if (pairs == 0) throw p2ad::ContractError("auc oracle: both classes required");
    return wins / static_cast<double>(pairs);
}

p2ad::QTensor random_qtensor(p2ad::Rng& rng, std::vector<int> shape,
                             int frac_bits, double max_abs, double zero_prob) {
    p2ad::QTensor t(std::move(shape), frac_bits);
    for (auto& v : t.data) {
        if (rng.next_double() < zero_prob) {
            v = 0;
        } else {
            v = p2ad::encode_fixed(rng.uniform(-max_abs, max_abs), frac_bits);
        }
    }
    return t;
}

p2ad::Pow2Tensor random_pow2(p2ad::Rng& rng, std::vector<int> shape,
                             int exp_min, int exp_max, double zero_prob) {
    std::size_t n = 1;
    for (int d : shape) n *= static_cast<std::size_t>(d);
    p2ad::Pow2Tensor t;
    t.shape = std::move(shape);
    t.sign.resize(n);
    t.exponent.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (rng.next_double() < zero_prob) {
            t.sign[i] = 0;
            t.exponent[i] = 0;
        } else {
            t.sign[i] = rng.next_double() < 0.5 ? 1 : -1;
            t.exponent[i] =
                static_cast<std::int8_t>(rng.uniform_int(exp_min, exp_max));
        }
    }
    return t;
}

}  // namespace oracles

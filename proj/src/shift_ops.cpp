#include "p2ad/shift_ops.hpp"

#include <cmath>

#include "p2ad/errors.hpp"

namespace p2ad {

int conv_output_extent(int extent, int kernel, int stride, int padding) {
    if (stride <= 0) throw ContractError("stride must be positive");
    const int span = extent + 2 * padding - kernel;
    if (span < 0) throw ContractError("kernel larger than padded input");
    return span / stride + 1;
}

std::uint64_t conv2d_dense_total(int out_channels, int out_h, int out_w,
                                 int in_channels, int kernel) {
    return static_cast<std::uint64_t>(out_channels) * out_h * out_w *
           in_channels * kernel * kernel;
}

std::uint64_t fc_dense_total(int out_features, int in_features) {
    return static_cast<std::uint64_t>(out_features) * in_features;
}

namespace {

// One output value: bias enters pre-shifted to the accumulator scale, each
// surviving tap adds the activation shifted left by exponent + align.
inline std::int32_t finish_acc(std::int64_t acc, int align) {
    return saturate_i32(rounding_shift_right(acc, align));
}

}  // namespace

QTensor conv2d_shift(const QTensor& input, const Pow2Tensor& weights,
                     std::span<const std::int32_t> bias, int stride,
                     int padding, OpCounter& counter) {
    if (input.shape.size() != 3) throw ContractError("conv2d: input must be [C,H,W]");
    if (weights.shape.size() != 4)
        throw ContractError("conv2d: weights must be [C_out,C_in,K,K]");
    if (padding < 0) throw ContractError("conv2d: padding must be non-negative");
    const int c_in = input.shape[0], h = input.shape[1], w = input.shape[2];
    const int c_out = weights.shape[0], k = weights.shape[2];
    if (weights.shape[1] != c_in)
        throw ContractError("conv2d: channel mismatch");
    if (weights.shape[3] != k) throw ContractError("conv2d: kernel must be square");
    if (static_cast<int>(bias.size()) != c_out)
        throw ContractError("conv2d: bias size mismatch");

    const int out_h = conv_output_extent(h, k, stride, padding);
    const int out_w = conv_output_extent(w, k, stride, padding);
    const int align = weights.alignment();

    QTensor out({c_out, out_h, out_w}, input.frac_bits);
    std::uint64_t done = 0, skipped = 0;

    for (int oc = 0; oc < c_out; ++oc) {
        const std::size_t wbase_oc = static_cast<std::size_t>(oc) * c_in * k * k;
        for (int oy = 0; oy < out_h; ++oy) {
            for (int ox = 0; ox < out_w; ++ox) {
                std::int64_t acc = static_cast<std::int64_t>(bias[oc]) << align;
                const int iy0 = oy * stride - padding;
                const int ix0 = ox * stride - padding;
                for (int ic = 0; ic < c_in; ++ic) {
                    const std::size_t ibase =
                        (static_cast<std::size_t>(ic) * h) * w;
                    const std::size_t wbase =
                        wbase_oc + (static_cast<std::size_t>(ic) * k) * k;
                    for (int ky = 0; ky < k; ++ky) {
                        const int iy = iy0 + ky;
                        if (iy < 0 || iy >= h) {
                            skipped += k;  // padded row: all taps read 0
                            continue;
                        }
                        for (int kx = 0; kx < k; ++kx) {
                            const int ix = ix0 + kx;
                            if (ix < 0 || ix >= w) {
                                ++skipped;
                                continue;
                            }
                            const std::int32_t a =
                                input.data[ibase + static_cast<std::size_t>(iy) * w + ix];
                            const std::size_t wi = wbase + static_cast<std::size_t>(ky) * k + kx;
                            const std::int8_t s = weights.sign[wi];
                            if (a == 0 || s == 0) {
                                ++skipped;
                                continue;
                            }
                            const int shift = weights.exponent[wi] + align;
                            const std::int64_t term = static_cast<std::int64_t>(a)
                                                      << shift;
                            acc += s > 0 ? term : -term;
                            ++done;
                        }
                    }
                }
                out.data[(static_cast<std::size_t>(oc) * out_h + oy) * out_w + ox] =
                    finish_acc(acc, align);
            }
        }
    }

    counter.shift_adds_done += done;
    counter.accumulates_skipped += skipped;
    counter.dense_total += conv2d_dense_total(c_out, out_h, out_w, c_in, k);
    return out;
}

QTensor fully_connected_shift(const QTensor& input, const Pow2Tensor& weights,
                              std::span<const std::int32_t> bias,
                              OpCounter& counter) {
    if (weights.shape.size() != 2)
        throw ContractError("fc: weights must be [out, in]");
    const int out_n = weights.shape[0], in_n = weights.shape[1];
    if (input.numel() != in_n) throw ContractError("fc: input size mismatch");
    if (static_cast<int>(bias.size()) != out_n)
        throw ContractError("fc: bias size mismatch");

    const int align = weights.alignment();
    QTensor out({out_n}, input.frac_bits);
    std::uint64_t done = 0, skipped = 0;

    for (int o = 0; o < out_n; ++o) {
        std::int64_t acc = static_cast<std::int64_t>(bias[o]) << align;
        const std::size_t wbase = static_cast<std::size_t>(o) * in_n;
        for (int i = 0; i < in_n; ++i) {
            const std::int32_t a = input.data[i];
            const std::int8_t s = weights.sign[wbase + i];
            if (a == 0 || s == 0) {
                ++skipped;
                continue;
            }
            const std::int64_t term = static_cast<std::int64_t>(a)
                                      << (weights.exponent[wbase + i] + align);
            acc += s > 0 ? term : -term;
            ++done;
        }
        out.data[o] = finish_acc(acc, align);
    }

    counter.shift_adds_done += done;
    counter.accumulates_skipped += skipped;
    counter.dense_total += fc_dense_total(out_n, in_n);
    return out;
}

QTensor leaky_relu(const QTensor& x, int negative_slope_log2) {
    if (negative_slope_log2 > 0)
        throw ContractError("leaky_relu: slope must be <= 1");
    QTensor out = x;
    const int s = -negative_slope_log2;
    for (auto& v : out.data)
        if (v < 0) v = saturate_i32(rounding_shift_right(v, s));
    return out;
}

std::optional<int> exact_log2(double slope) {
    if (!(slope > 0.0) || !std::isfinite(slope)) return std::nullopt;
    int e = 0;
    const double m = std::frexp(slope, &e);
    if (m != 0.5) return std::nullopt;
    return e - 1;
}

double sigmoid_real(double logit) {
    // Evaluate in the numerically stable branch.
    if (logit >= 0.0) {
        const double z = std::exp(-logit);
        return 1.0 / (1.0 + z);
    }
    const double z = std::exp(logit);
    return z / (1.0 + z);
}

double sigmoid_score(std::int32_t logit, int frac_bits) {
    double s = sigmoid_real(decode_fixed(logit, frac_bits));
    // Keep finite logits strictly inside (0, 1) so downstream ranking can
    // still distinguish sign at saturation.
    constexpr double eps = 1e-12;
    if (s <= 0.0) s = eps;
    if (s >= 1.0) s = 1.0 - eps;
    return s;
}

}  // namespace p2ad

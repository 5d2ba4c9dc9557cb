#pragma once

#include <cstdint>
#include <optional>
#include <span>

#include "p2ad/fixed_point.hpp"
#include "p2ad/op_counter.hpp"
#include "p2ad/pow2.hpp"

namespace p2ad {

// Multiplication-free layer kernels. Every activation-by-weight product is
// an arithmetic shift of the activation integer; accumulation happens in
// 64 bits at frac_bits + alignment fractional bits and is rescaled back
// with a single rounding shift. An accumulate is skipped (and counted as
// skipped) when the activation integer is exactly 0 or the weight sign
// is 0; out-of-range taps from zero padding read as activation 0.

// input [C_in, H, W], weights [C_out, C_in, K, K], bias per out channel.
QTensor conv2d_shift(const QTensor& input, const Pow2Tensor& weights,
                     std::span<const std::int32_t> bias, int stride,
                     int padding, OpCounter& counter);

// input flattened to [N], weights [out, N], bias per output.
QTensor fully_connected_shift(const QTensor& input, const Pow2Tensor& weights,
                              std::span<const std::int32_t> bias,
                              OpCounter& counter);

// x >= 0 -> x; x < 0 -> x * 2^negative_slope_log2 (a shift, so the
// negative branch stays multiplication-free). negative_slope_log2 <= 0.
QTensor leaky_relu(const QTensor& x, int negative_slope_log2);

// Exact power-of-two check for a LeakyReLU slope; nullopt when the slope
// is not representable as 2^k.
std::optional<int> exact_log2(double slope);

// Logistic function of the decoded fixed-point logit, nudged off the
// endpoints so finite logits always score strictly inside (0, 1).
double sigmoid_score(std::int32_t logit, int frac_bits);
double sigmoid_real(double logit);

// Analytic dense accumulate counts.
std::uint64_t conv2d_dense_total(int out_channels, int out_h, int out_w,
                                 int in_channels, int kernel);
std::uint64_t fc_dense_total(int out_features, int in_features);

// Output spatial size: floor((extent + 2*padding - kernel) / stride) + 1.
int conv_output_extent(int extent, int kernel, int stride, int padding);

}  // namespace p2ad

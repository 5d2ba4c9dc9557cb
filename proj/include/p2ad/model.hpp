#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "p2ad/denoise.hpp"
#include "p2ad/fixed_point.hpp"
#include "p2ad/image.hpp"
#include "p2ad/op_counter.hpp"
#include "p2ad/pow2.hpp"
#include "p2ad/shift_ops.hpp"

namespace p2ad {

struct ConvLayerSpec {
    int out_channels = 0;
    int kernel = 0;
    int stride = 1;
    int padding = 0;

    bool operator==(const ConvLayerSpec&) const = default;
};

// Network topology: strided convolutions with LeakyReLU, then fully
// connected hidden layers with LeakyReLU, then a scalar sigmoid head.
// Input is a single-channel flow-magnitude image.
struct ModelSpec {
    int input_height = 64;
    int input_width = 64;
    std::vector<ConvLayerSpec> conv_layers = {
        {8, 4, 2, 1}, {16, 4, 2, 1}, {32, 4, 2, 1}};
    std::vector<int> fc_hidden = {128, 32};
    double leaky_slope = 0.125;  // must be a power of two
    int frac_bits = kDefaultFracBits;
    int weight_exp_min = kDefaultWeightExpMin;
    int weight_exp_max = kDefaultWeightExpMax;

    void validate() const;
    // Activation layers that can be denoised: conv layers then fc hidden.
    int denoisable_layer_count() const;

    bool operator==(const ModelSpec&) const = default;
};

struct ConvLayer {
    ConvLayerSpec spec;
    int in_channels = 0;
    // Real-valued (shadow) parameters, the training view.
    std::vector<double> weights;  // [out, in, k, k]
    std::vector<double> bias;
    // Quantized view used by shift-only inference.
    Pow2Tensor q_weights;
    std::vector<std::int32_t> q_bias;
};

struct FcLayer {
    int in_features = 0;
    int out_features = 0;
    std::vector<double> weights;  // [out, in]
    std::vector<double> bias;
    Pow2Tensor q_weights;
    std::vector<std::int32_t> q_bias;
};

// A trained (or freshly initialized) network. Immutable during inference;
// infer() and infer_real() are reentrant and own their counters.
struct Model {
    ModelSpec spec;
    std::vector<ConvLayer> conv;
    std::vector<FcLayer> fc;  // hidden layers then the width-1 head
    ThresholdSpec thresholds;

    int negative_slope_log2 = -3;

    // Re-quantizes the shadow parameters into the pow2/fixed-point view.
    void refresh_quantized_view();

    std::int64_t parameter_count() const;
};

struct InferenceResult {
    double score = 0.0;  // anomaly probability
    OpCounter counter;   // aggregated over all layers
    std::vector<double> per_layer_zero_fraction;
};

// Weights from a seeded fan-in-scaled uniform distribution, biases zero,
// quantized view refreshed. Deterministic given the seed.
Model build_model(const ModelSpec& spec, std::uint64_t seed);

// Shift-only fixed-point inference. thresholds_override, when non-null,
// replaces the model's stored ThresholdSpec for this call.
InferenceResult infer(const Model& model, const Image& frame,
                      const ThresholdSpec* thresholds_override = nullptr);

// Real-arithmetic inference over the shadow weights (the regular-network
// path). Skips are counted where an activation or weight is exactly 0.
InferenceResult infer_real(const Model& model, const Image& frame,
                           const ThresholdSpec* thresholds_override = nullptr);

// Versioned little-endian binary container. Layout: magic "P2AD",
// u16 version, header (frac_bits, topology table), per-layer weight
// blobs as 2-bit packed signs plus int8 exponents, int32 fixed-point
// biases, ThresholdSpec records, then the real-valued shadow weights.
void save_model(const Model& model, const std::string& path);
Model load_model(const std::string& path);

}  // namespace p2ad

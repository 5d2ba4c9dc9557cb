#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "p2ad/model.hpp"
#include "p2ad/synth.hpp"

namespace p2ad {

struct TrainConfig {
    int epochs_max = 120;
    int batch_size = 64;
    double learning_rate = 1e-3;
    double loss_stop = 0.01;  // stop when the epoch-mean BCE falls below
    std::uint64_t seed = 0;
    // Per denoised conv layer; 0 means no calibration for that layer
    // (theta comes from explicit configuration instead).
    std::vector<double> theta_quantile;
    // When false, the forward pass uses the shadow weights directly,
    // producing the regular (unconstrained) baseline network.
    bool quantize_per_epoch = true;

    void validate() const;
};

struct TrainResult {
    Model model;
    double final_loss = 0.0;
    int epochs_run = 0;
};

// Supervised training with BCE loss and plain SGD. The forward pass runs
// the quantized weight view (refreshed at each epoch end); gradients pass
// straight through the quantizer to real-valued shadow weights. The
// shuffle order is fixed by the seed, so training is deterministic.
// Refuses datasets that contain only one class.
TrainResult train(std::span<const LabeledFrame> data, const ModelSpec& spec,
                  const TrainConfig& config);

// -mean(y log s + (1 - y) log(1 - s)) with scores clamped to
// [1e-7, 1 - 1e-7].
double bce_loss(std::span<const double> scores, std::span<const int> labels);

// Per-parameter gradients of the mean BCE over a batch, in layer order
// (conv weights, conv bias, fc weights, fc bias). When use_quantized is
// set the forward/backward linearization point is the quantized view
// (the straight-through estimate); otherwise the shadow weights.
struct ModelGradients {
    std::vector<std::vector<double>> conv_weights;
    std::vector<std::vector<double>> conv_bias;
    std::vector<std::vector<double>> fc_weights;
    std::vector<std::vector<double>> fc_bias;
};
double compute_loss_and_gradients(const Model& model,
                                  std::span<const LabeledFrame> batch,
                                  bool use_quantized, ModelGradients& grads);

// Runs inference with denoising disabled over normal frames, pools the
// post-activation magnitudes of each requested conv layer, and returns
// thetas at the requested quantiles (quantile 0 yields theta 0, i.e.
// denoising disabled). quantiles[i] applies to conv layer i.
ThresholdSpec calibrate_theta(const Model& model, std::span<const Image> frames,
                              std::span<const double> quantiles,
                              DenoiseMode mode = DenoiseMode::soft);

}  // namespace p2ad

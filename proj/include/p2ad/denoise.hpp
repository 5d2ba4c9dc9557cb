#pragma once

#include <span>
#include <string>
#include <vector>

#include "p2ad/fixed_point.hpp"

namespace p2ad {

enum class DenoiseMode { none, soft, hard, l1_ball };

std::string to_string(DenoiseMode mode);
DenoiseMode denoise_mode_from_string(const std::string& name);

// Per-layer denoising entry. value is theta for soft/hard (>= 0) and the
// ball size epsilon for l1_ball (> 0); unused for none.
struct LayerThreshold {
    int layer_index = 0;
    DenoiseMode mode = DenoiseMode::none;
    double value = 0.0;

    bool operator==(const LayerThreshold&) const = default;
};

// Denoising configuration for a whole network: at most one entry per
// layer index.
struct ThresholdSpec {
    std::vector<LayerThreshold> layers;

    const LayerThreshold* find(int layer_index) const;
    void validate() const;

    bool operator==(const ThresholdSpec&) const = default;
};

// u_i = sgn(x_i) * max(|x_i| - theta, 0).
std::vector<double> soft_threshold(std::span<const double> x, double theta);

// x_i kept when |x_i| > theta, zeroed otherwise.
std::vector<double> hard_threshold(std::span<const double> x, double theta);

struct L1Projection {
    std::vector<double> values;
    double theta = 0.0;  // shrinkage actually applied; 0 when x was inside the ball
};

// Euclidean projection onto {v : ||v||_1 <= epsilon}. Inputs already
// inside the ball pass through unchanged. Otherwise theta is found by
// sorting magnitudes (O(n log n)) and the result is exactly
// soft_threshold(x, theta): the last step of the projection is the soft
// thresholding operation.
L1Projection project_l1_ball(std::span<const double> x, double epsilon);

// Applies one entry to a fixed-point activation tensor. Thresholds are
// compared against decoded real values and the result is re-encoded;
// mode none returns the input unchanged.
QTensor apply_denoising(const QTensor& activations, const LayerThreshold& entry);

// Same semantics on a real-valued activation vector (in place).
void apply_denoising_real(std::vector<double>& activations,
                          const LayerThreshold& entry);

}  // namespace p2ad

#pragma once

#include <string>
#include <vector>

#include "p2ad/image.hpp"

namespace p2ad {

// Dense per-pixel displacement field in pixels/frame, row-major.
// Components are float32 to match the .flo on-disk layout bit for bit.
struct FlowField {
    int width = 0;
    int height = 0;
    std::vector<float> u;
    std::vector<float> v;

    FlowField() = default;
    FlowField(int width, int height);

    Image magnitude() const;
};

// Single-scale dense optical flow by local polynomial expansion: each
// pixel's neighborhood is fit with a quadratic over a Gaussian-weighted
// window, displacement follows from the coefficient differences between
// the two frames, and the estimate is refined `iterations` times with
// the second frame's coefficients sampled at the displaced position.
// Windows are clamped at the border. window must be odd and >= 3.
FlowField farneback_flow(const Image& frame_a, const Image& frame_b,
                         int window = 15, int iterations = 3);

// Middlebury .flo: float magic "PIEH", int32 width, int32 height, then
// row-major interleaved (u, v) float32 pairs, all little-endian.
FlowField read_flo(const std::string& path);
void write_flo(const FlowField& field, const std::string& path);

}  // namespace p2ad

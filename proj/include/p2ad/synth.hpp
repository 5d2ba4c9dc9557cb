#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "p2ad/image.hpp"
#include "p2ad/rng.hpp"

namespace p2ad {

// Synthetic flow-magnitude scene parameters. Pedestrians are small slow
// blobs; an anomaly is one large fast blob. anomaly speed_lo must sit
// strictly above the pedestrian speed range so the two classes are
// separable by construction.
struct SynthParams {
    int image_size = 64;
    int ped_count_lo = 3;
    int ped_count_hi = 8;
    double ped_sigma_lo = 2.0;
    double ped_sigma_hi = 4.0;
    double ped_speed_lo = 0.2;
    double ped_speed_hi = 1.0;
    double anomaly_sigma_lo = 5.0;
    double anomaly_sigma_hi = 9.0;
    double anomaly_speed_lo = 2.0;
    double anomaly_speed_hi = 4.0;
    int blur_radius = 1;
    std::uint64_t seed = 0;

    void validate() const;
};

// Background-motion noise: isotropic Gaussian bumps at uniform random
// centers. sigma defaults to 4 px (spatial variance 16 px^2).
struct NoiseParams {
    double sigma = 4.0;
    double peak_lo = 0.05;
    double peak_hi = 0.3;
};

struct LabeledFrame {
    Image image;
    int label = 0;  // 1 = anomalous
};

// Renders one frame. Blobs combine by max (overlapping movers occlude
// rather than add), then a box blur stands in for the blur of generated
// flow imagery. Output is non-negative everywhere.
Image synth_frame(const SynthParams& params, int label, Rng& rng);

// Adds blob_count Gaussian bumps, each drawing (cx, cy, peak) from rng in
// that order; peaks are uniform in [noise.peak_lo, noise.peak_hi]. The
// result is clamped at 0 below. Consuming the rng sequentially makes
// blob counts nest: 5 blobs then 5 more equals 10 from the same stream.
Image add_noise_blobs(const Image& image, int blob_count,
                      const NoiseParams& noise, Rng& rng);

struct Dataset {
    std::vector<LabeledFrame> train;
    std::vector<LabeledFrame> test;
};

// Deterministic labeled dataset: n_normal + n_anomalous frames, each
// generated from its own seed substream, stratified-split into
// train/test by a seeded shuffle at train_ratio.
Dataset make_dataset(const SynthParams& params, int n_normal, int n_anomalous,
                     std::uint64_t seed, double train_ratio = 2.0 / 3.0);

// FNV-1a over frame pixels and labels of both splits; stable content
// fingerprint for reproducibility checks.
std::uint64_t dataset_hash(const Dataset& dataset);

// On-disk layout: frames/frame_NNNNNN.flo (magnitude stored in u, v = 0)
// plus line-oriented manifests train.txt / test.txt of "path label".
void save_dataset(const Dataset& dataset, const std::string& dir);
Dataset load_dataset(const std::string& dir);

}  // namespace p2ad

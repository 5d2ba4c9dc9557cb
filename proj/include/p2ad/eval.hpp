#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "p2ad/denoise.hpp"
#include "p2ad/model.hpp"
#include "p2ad/synth.hpp"

namespace p2ad {

struct RocPoint {
    double fpr = 0.0;
    double tpr = 0.0;
};

struct RocResult {
    std::vector<RocPoint> points;  // (0,0) .. (1,1), monotone
    double auc = 0.0;
};

// Threshold sweep over unique scores, ties grouped into one step; AUC by
// the trapezoidal rule. Requires both classes present.
RocResult roc_auc(std::span<const double> scores, std::span<const int> labels);

enum class NetworkKind { regular, pow2 };
std::string to_string(NetworkKind kind);

// One sweep cell: a denoising mode with optional per-layer thetas for the
// first two conv layers (unset = that layer not denoised). mode none
// ignores the thetas.
struct SweepThresholds {
    DenoiseMode mode = DenoiseMode::none;
    std::optional<double> theta1;
    std::optional<double> theta2;

    ThresholdSpec to_spec() const;
    bool operator==(const SweepThresholds&) const = default;
};

struct EvalRow {
    NetworkKind network = NetworkKind::pow2;
    SweepThresholds config;
    int noise_blobs = 0;
    double auc = 0.0;
    // Denoising-attributable savings: mean over frames of the savings
    // fraction minus the mode-none baseline on the same noisy frame,
    // in percent. Mode none rows are 0 by definition.
    double savings_pct = 0.0;
    std::vector<RocPoint> roc;
};

struct EvalReport {
    std::vector<EvalRow> rows;
};

struct SweepOptions {
    std::vector<SweepThresholds> configs;
    std::vector<int> noise_levels = {0, 5, 10, 20};
    std::uint64_t seed = 0;
    NoiseParams noise;
};

// Scores every test frame for every (network, config, noise level) cell.
// Noise blobs for a frame are drawn once from a per-frame stream and
// levels take prefixes of that stream, so realizations are paired across
// levels and identical across configs and networks. Baselines for the
// savings accounting run internally whether or not mode none is listed.
EvalReport sweep(const Model& regular, const Model& pow2,
                 std::span<const LabeledFrame> test_set,
                 const SweepOptions& options);

// CSV with header network,mode,theta1,theta2,noise_blobs,auc,savings_pct.
// Unset thetas serialize as empty fields; doubles round-trip exactly.
void emit_csv(const EvalReport& report, const std::string& path);
EvalReport parse_report_csv(const std::string& path);  // rows only, no ROC

// One two-column CSV (fpr,tpr) per row, named by the row key, under dir.
void emit_roc_points(const EvalReport& report, const std::string& dir);

}  // namespace p2ad

#include "p2ad/denoise.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

#include "p2ad/errors.hpp"

namespace p2ad {

std::string to_string(DenoiseMode mode) {
    switch (mode) {
        case DenoiseMode::none: return "none";
        case DenoiseMode::soft: return "soft";
        case DenoiseMode::hard: return "hard";
        case DenoiseMode::l1_ball: return "l1_ball";
    }
    throw ContractError("unknown denoise mode");
}

DenoiseMode denoise_mode_from_string(const std::string& name) {
    if (name == "none") return DenoiseMode::none;
    if (name == "soft") return DenoiseMode::soft;
    if (name == "hard") return DenoiseMode::hard;
    if (name == "l1_ball") return DenoiseMode::l1_ball;
    throw ContractError("unknown denoise mode: " + name);
}

const LayerThreshold* ThresholdSpec::find(int layer_index) const {
    for (const auto& e : layers)
        if (e.layer_index == layer_index) return &e;
    return nullptr;
}

void ThresholdSpec::validate() const {
    std::unordered_set<int> seen;
    for (const auto& e : layers) {
        if (e.layer_index < 0)
            throw ContractError("threshold layer_index must be non-negative");
        if (!seen.insert(e.layer_index).second)
            throw ContractError("duplicate threshold entry for layer " +
                                std::to_string(e.layer_index));
        if (!std::isfinite(e.value))
            throw ContractError("threshold value must be finite");
        switch (e.mode) {
            case DenoiseMode::none:
                break;
            case DenoiseMode::soft:
            case DenoiseMode::hard:
                if (e.value < 0.0)
                    throw ContractError("theta must be non-negative");
                break;
            case DenoiseMode::l1_ball:
                if (e.value <= 0.0)
                    throw ContractError("epsilon must be positive");
                break;
        }
    }
}

std::vector<double> soft_threshold(std::span<const double> x, double theta) {
    if (theta < 0.0) throw ContractError("soft_threshold: theta must be >= 0");
    std::vector<double> u(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double m = std::fabs(x[i]) - theta;
        u[i] = m > 0.0 ? std::copysign(m, x[i]) : 0.0;
    }
    return u;
}

std::vector<double> hard_threshold(std::span<const double> x, double theta) {
    if (theta < 0.0) throw ContractError("hard_threshold: theta must be >= 0");
    std::vector<double> u(x.size());
    for (std::size_t i = 0; i < x.size(); ++i)
        u[i] = std::fabs(x[i]) > theta ? x[i] : 0.0;
    return u;
}

L1Projection project_l1_ball(std::span<const double> x, double epsilon) {
    if (!(epsilon > 0.0)) throw ContractError("project_l1_ball: epsilon must be > 0");
    L1Projection result;

    double l1 = 0.0;
    for (double v : x) l1 += std::fabs(v);
    if (l1 <= epsilon) {
        result.values.assign(x.begin(), x.end());
        result.theta = 0.0;
        return result;
    }

    // Sort magnitudes descending; the largest k with
    // mu_k - (prefix_k - epsilon) / k > 0 fixes the support, and theta is
    // that mean excess.
    std::vector<double> mu(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) mu[i] = std::fabs(x[i]);
    std::sort(mu.begin(), mu.end(), std::greater<>());

    double prefix = 0.0;
    double theta = 0.0;
    for (std::size_t k = 1; k <= mu.size(); ++k) {
        prefix += mu[k - 1];
        const double t = (prefix - epsilon) / static_cast<double>(k);
        if (mu[k - 1] - t > 0.0)
            theta = t;
        else
            break;
    }

    result.theta = theta;
    result.values = soft_threshold(x, theta);
    return result;
}

QTensor apply_denoising(const QTensor& activations, const LayerThreshold& entry) {
    if (entry.mode == DenoiseMode::none) return activations;
    std::vector<double> real = from_fixed(activations);
    apply_denoising_real(real, entry);
    return to_fixed(real, activations.shape, activations.frac_bits);
}

void apply_denoising_real(std::vector<double>& activations,
                          const LayerThreshold& entry) {
    switch (entry.mode) {
        case DenoiseMode::none:
            return;
        case DenoiseMode::soft:
            activations = soft_threshold(activations, entry.value);
            return;
        case DenoiseMode::hard:
            activations = hard_threshold(activations, entry.value);
            return;
        case DenoiseMode::l1_ball:
            activations = project_l1_ball(activations, entry.value).values;
            return;
    }
}

}  // namespace p2ad

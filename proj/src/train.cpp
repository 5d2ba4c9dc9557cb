#include "p2ad/train.hpp"

#include <algorithm>
#include <cmath>

#include "p2ad/errors.hpp"
#include "p2ad/rng.hpp"

namespace p2ad {

void TrainConfig::validate() const {
    if (epochs_max < 1) throw ContractError("epochs_max must be >= 1");
    if (batch_size < 1) throw ContractError("batch_size must be >= 1");
    if (!(learning_rate > 0.0) || !std::isfinite(learning_rate))
        throw ContractError("learning_rate must be positive");
    if (!(loss_stop >= 0.0)) throw ContractError("loss_stop must be >= 0");
    for (double q : theta_quantile)
        if (!(q >= 0.0) || !(q <= 1.0))
            throw ContractError("theta quantiles must be in [0, 1]");
}

double bce_loss(std::span<const double> scores, std::span<const int> labels) {
    if (scores.size() != labels.size())
        throw ContractError("bce_loss: size mismatch");
    if (scores.empty()) throw ContractError("bce_loss: empty input");
    constexpr double eps = 1e-7;
    double total = 0.0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        const double s = std::clamp(scores[i], eps, 1.0 - eps);
        total += labels[i] == 1 ? -std::log(s) : -std::log(1.0 - s);
    }
    return total / static_cast<double>(scores.size());
}

namespace {

// Forward activations for one sample, kept for the backward pass.
// conv_post[i] holds the LeakyReLU output of conv layer i (and the input
// image sits in conv_post[-1] conceptually, stored separately).
struct ForwardTrace {
    std::vector<std::vector<double>> conv_pre;  // pre-activation
    std::vector<std::vector<double>> conv_post;
    std::vector<std::vector<double>> fc_pre;
    std::vector<std::vector<double>> fc_post;  // post LeakyReLU (not head)
    double score = 0.0;
};

struct LayerDims {
    int c, h, w;
};

// The linearization point of the backward pass: quantized view decoded to
// reals (straight-through) or the shadow weights themselves.
std::vector<double> effective_conv_weights(const ConvLayer& l, bool quantized) {
    if (!quantized) return l.weights;
    std::vector<double> w(l.q_weights.size());
    for (std::size_t i = 0; i < w.size(); ++i) w[i] = l.q_weights.value_at(i);
    return w;
}

std::vector<double> effective_fc_weights(const FcLayer& l, bool quantized) {
    if (!quantized) return l.weights;
    std::vector<double> w(l.q_weights.size());
    for (std::size_t i = 0; i < w.size(); ++i) w[i] = l.q_weights.value_at(i);
    return w;
}

struct EffectiveParams {
    std::vector<std::vector<double>> conv_w;
    std::vector<std::vector<double>> fc_w;
    std::vector<LayerDims> conv_in;   // input dims of each conv layer
    std::vector<LayerDims> conv_out;  // output dims of each conv layer
};

EffectiveParams snapshot_params(const Model& model, bool quantized) {
    EffectiveParams p;
    int c = 1, h = model.spec.input_height, w = model.spec.input_width;
    for (const auto& l : model.conv) {
        p.conv_w.push_back(effective_conv_weights(l, quantized));
        p.conv_in.push_back({c, h, w});
        h = conv_output_extent(h, l.spec.kernel, l.spec.stride, l.spec.padding);
        w = conv_output_extent(w, l.spec.kernel, l.spec.stride, l.spec.padding);
        c = l.spec.out_channels;
        p.conv_out.push_back({c, h, w});
    }
    for (const auto& l : model.fc) p.fc_w.push_back(effective_fc_weights(l, quantized));
    return p;
}

void conv_forward(const std::vector<double>& x, LayerDims in, LayerDims out,
                  const ConvLayerSpec& cs, const std::vector<double>& weights,
                  const std::vector<double>& bias, std::vector<double>& y) {
    const int k = cs.kernel, stride = cs.stride, pad = cs.padding;
    y.assign(static_cast<std::size_t>(out.c) * out.h * out.w, 0.0);
    for (int oc = 0; oc < out.c; ++oc) {
        const std::size_t wb_oc = static_cast<std::size_t>(oc) * in.c * k * k;
        for (int oy = 0; oy < out.h; ++oy) {
            for (int ox = 0; ox < out.w; ++ox) {
                double acc = bias[static_cast<std::size_t>(oc)];
                const int iy0 = oy * stride - pad, ix0 = ox * stride - pad;
                for (int ic = 0; ic < in.c; ++ic) {
                    for (int ky = 0; ky < k; ++ky) {
                        const int iy = iy0 + ky;
                        if (iy < 0 || iy >= in.h) continue;
                        for (int kx = 0; kx < k; ++kx) {
                            const int ix = ix0 + kx;
                            if (ix < 0 || ix >= in.w) continue;
                            acc += x[(static_cast<std::size_t>(ic) * in.h + iy) * in.w + ix] *
                                   weights[wb_oc + (static_cast<std::size_t>(ic) * k + ky) * k + kx];
                        }
                    }
                }
                y[(static_cast<std::size_t>(oc) * out.h + oy) * out.w + ox] = acc;
            }
        }
    }
}

// Accumulates weight/bias gradients and returns the input gradient.
std::vector<double> conv_backward(const std::vector<double>& x, LayerDims in,
                                  LayerDims out, const ConvLayerSpec& cs,
                                  const std::vector<double>& weights,
                                  const std::vector<double>& dy,
                                  std::vector<double>& dw, std::vector<double>& db) {
    const int k = cs.kernel, stride = cs.stride, pad = cs.padding;
    std::vector<double> dx(x.size(), 0.0);
    for (int oc = 0; oc < out.c; ++oc) {
        const std::size_t wb_oc = static_cast<std::size_t>(oc) * in.c * k * k;
        for (int oy = 0; oy < out.h; ++oy) {
            for (int ox = 0; ox < out.w; ++ox) {
                const double g =
                    dy[(static_cast<std::size_t>(oc) * out.h + oy) * out.w + ox];
                if (g == 0.0) continue;
                db[static_cast<std::size_t>(oc)] += g;
                const int iy0 = oy * stride - pad, ix0 = ox * stride - pad;
                for (int ic = 0; ic < in.c; ++ic) {
                    for (int ky = 0; ky < k; ++ky) {
                        const int iy = iy0 + ky;
                        if (iy < 0 || iy >= in.h) continue;
                        for (int kx = 0; kx < k; ++kx) {
                            const int ix = ix0 + kx;
                            if (ix < 0 || ix >= in.w) continue;
                            const std::size_t xi =
                                (static_cast<std::size_t>(ic) * in.h + iy) * in.w + ix;
                            const std::size_t wi =
                                wb_oc + (static_cast<std::size_t>(ic) * k + ky) * k + kx;
                            dw[wi] += g * x[xi];
                            dx[xi] += g * weights[wi];
                        }
                    }
                }
            }
        }
    }
    return dx;
}

void leaky_forward(const std::vector<double>& z, double slope,
                   std::vector<double>& a) {
    a.resize(z.size());
    for (std::size_t i = 0; i < z.size(); ++i)
        a[i] = z[i] > 0.0 ? z[i] : z[i] * slope;
}

void leaky_backward(const std::vector<double>& z, double slope,
                    std::vector<double>& grad) {
    for (std::size_t i = 0; i < z.size(); ++i)
        if (!(z[i] > 0.0)) grad[i] *= slope;
}

ForwardTrace forward_sample(const Model& model, const EffectiveParams& p,
                            const Image& frame) {
    ForwardTrace t;
    const double slope = model.spec.leaky_slope;
    std::vector<double> x = frame.pixels;
    for (std::size_t i = 0; i < model.conv.size(); ++i) {
        std::vector<double> z;
        conv_forward(x, p.conv_in[i], p.conv_out[i], model.conv[i].spec,
                     p.conv_w[i], model.conv[i].bias, z);
        std::vector<double> a;
        leaky_forward(z, slope, a);
        t.conv_pre.push_back(std::move(z));
        t.conv_post.push_back(a);
        x = std::move(a);
    }
    for (std::size_t i = 0; i < model.fc.size(); ++i) {
        const auto& l = model.fc[i];
        std::vector<double> z(static_cast<std::size_t>(l.out_features));
        for (int o = 0; o < l.out_features; ++o) {
            double acc = l.bias[static_cast<std::size_t>(o)];
            const std::size_t wb = static_cast<std::size_t>(o) * l.in_features;
            for (int j = 0; j < l.in_features; ++j)
                acc += p.fc_w[i][wb + static_cast<std::size_t>(j)] *
                       x[static_cast<std::size_t>(j)];
            z[static_cast<std::size_t>(o)] = acc;
        }
        t.fc_pre.push_back(z);
        if (i + 1 < model.fc.size()) {
            std::vector<double> a;
            leaky_forward(z, slope, a);
            t.fc_post.push_back(a);
            x = std::move(a);
        } else {
            x = std::move(z);
        }
    }
    t.score = sigmoid_real(x[0]);
    return t;
}

void zero_gradients(const Model& model, ModelGradients& g) {
    g.conv_weights.assign(model.conv.size(), {});
    g.conv_bias.assign(model.conv.size(), {});
    for (std::size_t i = 0; i < model.conv.size(); ++i) {
        g.conv_weights[i].assign(model.conv[i].weights.size(), 0.0);
        g.conv_bias[i].assign(model.conv[i].bias.size(), 0.0);
    }
    g.fc_weights.assign(model.fc.size(), {});
    g.fc_bias.assign(model.fc.size(), {});
    for (std::size_t i = 0; i < model.fc.size(); ++i) {
        g.fc_weights[i].assign(model.fc[i].weights.size(), 0.0);
        g.fc_bias[i].assign(model.fc[i].bias.size(), 0.0);
    }
}

}  // namespace

double compute_loss_and_gradients(const Model& model,
                                  std::span<const LabeledFrame> batch,
                                  bool use_quantized, ModelGradients& grads) {
    if (batch.empty()) throw ContractError("empty batch");
    const EffectiveParams p = snapshot_params(model, use_quantized);
    zero_gradients(model, grads);
    const double slope = model.spec.leaky_slope;
    const double inv_n = 1.0 / static_cast<double>(batch.size());

    std::vector<double> scores(batch.size());
    std::vector<int> labels(batch.size());

    for (std::size_t bi = 0; bi < batch.size(); ++bi) {
        const auto& sample = batch[bi];
        ForwardTrace t = forward_sample(model, p, sample.image);
        scores[bi] = t.score;
        labels[bi] = sample.label;

        // d(meanBCE)/dlogit for one sample, mean already folded in.
        double dz = (t.score - static_cast<double>(sample.label)) * inv_n;

        // Head and hidden FC layers, walking backwards.
        std::vector<double> grad_out = {dz};
        for (int li = static_cast<int>(model.fc.size()) - 1; li >= 0; --li) {
            const auto& l = model.fc[static_cast<std::size_t>(li)];
            const std::vector<double>& input =
                li == 0 ? (model.conv.empty() ? sample.image.pixels
                                              : t.conv_post.back())
                        : t.fc_post[static_cast<std::size_t>(li - 1)];
            auto& dw = grads.fc_weights[static_cast<std::size_t>(li)];
            auto& db = grads.fc_bias[static_cast<std::size_t>(li)];
            std::vector<double> grad_in(static_cast<std::size_t>(l.in_features), 0.0);
            for (int o = 0; o < l.out_features; ++o) {
                const double g = grad_out[static_cast<std::size_t>(o)];
                if (g == 0.0) continue;
                db[static_cast<std::size_t>(o)] += g;
                const std::size_t wb = static_cast<std::size_t>(o) * l.in_features;
                const auto& wrow = p.fc_w[static_cast<std::size_t>(li)];
                for (int j = 0; j < l.in_features; ++j) {
                    dw[wb + static_cast<std::size_t>(j)] +=
                        g * input[static_cast<std::size_t>(j)];
                    grad_in[static_cast<std::size_t>(j)] +=
                        g * wrow[wb + static_cast<std::size_t>(j)];
                }
            }
            if (li > 0)
                leaky_backward(t.fc_pre[static_cast<std::size_t>(li - 1)], slope,
                               grad_in);
            grad_out = std::move(grad_in);
        }

        // Conv stack.
        for (int li = static_cast<int>(model.conv.size()) - 1; li >= 0; --li) {
            leaky_backward(t.conv_pre[static_cast<std::size_t>(li)], slope, grad_out);
            const std::vector<double>& input =
                li == 0 ? sample.image.pixels
                        : t.conv_post[static_cast<std::size_t>(li - 1)];
            grad_out = conv_backward(
                input, p.conv_in[static_cast<std::size_t>(li)],
                p.conv_out[static_cast<std::size_t>(li)],
                model.conv[static_cast<std::size_t>(li)].spec,
                p.conv_w[static_cast<std::size_t>(li)], grad_out,
                grads.conv_weights[static_cast<std::size_t>(li)],
                grads.conv_bias[static_cast<std::size_t>(li)]);
        }
    }

    return bce_loss(scores, labels);
}

TrainResult train(std::span<const LabeledFrame> data, const ModelSpec& spec,
                  const TrainConfig& config) {
    config.validate();
    spec.validate();
    if (data.empty()) throw ContractError("train: empty dataset");
    bool has_normal = false, has_anomalous = false;
    for (const auto& f : data) {
        if (f.label == 0) has_normal = true;
        else if (f.label == 1) has_anomalous = true;
        else throw ContractError("train: labels must be 0 or 1");
        if (f.image.width != spec.input_width ||
            f.image.height != spec.input_height)
            throw ContractError("train: frame size does not match model input");
    }
    if (!has_normal || !has_anomalous)
        throw ContractError("train: dataset must contain both classes");
    if (static_cast<int>(config.theta_quantile.size()) >
        static_cast<int>(spec.conv_layers.size()))
        throw ContractError("train: more theta quantiles than conv layers");

    Model model = build_model(spec, mix_seed(config.seed, 0xb001d));

    const std::size_t n = data.size();
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;

    ModelGradients grads;
    std::vector<LabeledFrame> batch;
    double epoch_loss = 0.0;
    int epochs_run = 0;

    for (int epoch = 0; epoch < config.epochs_max; ++epoch) {
        Rng shuffle_rng(mix_seed(config.seed, 1000 + static_cast<std::uint64_t>(epoch)));
        shuffle_rng.shuffle(order);

        double loss_sum = 0.0;
        std::size_t seen = 0;
        for (std::size_t start = 0; start < n; start += static_cast<std::size_t>(config.batch_size)) {
            const std::size_t end =
                std::min(n, start + static_cast<std::size_t>(config.batch_size));
            batch.clear();
            for (std::size_t i = start; i < end; ++i)
                batch.push_back(data[order[i]]);

            const double loss = compute_loss_and_gradients(
                model, batch, config.quantize_per_epoch, grads);
            loss_sum += loss * static_cast<double>(batch.size());
            seen += batch.size();

            const double lr = config.learning_rate;
            for (std::size_t li = 0; li < model.conv.size(); ++li) {
                auto& l = model.conv[li];
                for (std::size_t i = 0; i < l.weights.size(); ++i)
                    l.weights[i] -= lr * grads.conv_weights[li][i];
                for (std::size_t i = 0; i < l.bias.size(); ++i)
                    l.bias[i] -= lr * grads.conv_bias[li][i];
            }
            for (std::size_t li = 0; li < model.fc.size(); ++li) {
                auto& l = model.fc[li];
                for (std::size_t i = 0; i < l.weights.size(); ++i)
                    l.weights[i] -= lr * grads.fc_weights[li][i];
                for (std::size_t i = 0; i < l.bias.size(); ++i)
                    l.bias[i] -= lr * grads.fc_bias[li][i];
            }
        }

        epoch_loss = loss_sum / static_cast<double>(seen);
        ++epochs_run;
        if (config.quantize_per_epoch) model.refresh_quantized_view();
        if (epoch_loss < config.loss_stop) break;
    }

    model.refresh_quantized_view();

    // Theta calibration over the normal training frames.
    bool any_quantile = false;
    for (double q : config.theta_quantile)
        if (q > 0.0) any_quantile = true;
    if (any_quantile) {
        std::vector<Image> normals;
        for (const auto& f : data)
            if (f.label == 0) normals.push_back(f.image);
        model.thresholds =
            calibrate_theta(model, normals, config.theta_quantile);
    }

    return TrainResult{std::move(model), epoch_loss, epochs_run};
}

ThresholdSpec calibrate_theta(const Model& model, std::span<const Image> frames,
                              std::span<const double> quantiles,
                              DenoiseMode mode) {
    if (frames.empty()) throw ContractError("calibrate_theta: no frames");
    if (quantiles.size() > model.conv.size())
        throw ContractError("calibrate_theta: more quantiles than conv layers");
    for (double q : quantiles)
        if (!(q >= 0.0) || !(q <= 1.0))
            throw ContractError("calibrate_theta: quantile out of [0, 1]");

    // Pool post-activation magnitudes per conv layer with denoising off.
    std::vector<std::vector<double>> pooled(quantiles.size());
    for (const auto& frame : frames) {
        QTensor x = to_fixed(frame.pixels,
                             {1, model.spec.input_height, model.spec.input_width},
                             model.spec.frac_bits);
        OpCounter counter;
        for (std::size_t li = 0; li < quantiles.size(); ++li) {
            const auto& l = model.conv[li];
            x = conv2d_shift(x, l.q_weights, l.q_bias, l.spec.stride,
                             l.spec.padding, counter);
            x = leaky_relu(x, model.negative_slope_log2);
            auto& pool = pooled[li];
            pool.reserve(pool.size() + x.data.size());
            for (auto v : x.data)
                pool.push_back(std::fabs(decode_fixed(v, x.frac_bits)));
        }
    }

    ThresholdSpec spec;
    for (std::size_t li = 0; li < quantiles.size(); ++li) {
        const double q = quantiles[li];
        double theta = 0.0;
        if (q > 0.0) {
            auto& pool = pooled[li];
            std::sort(pool.begin(), pool.end());
            const auto idx = static_cast<std::size_t>(
                std::floor(q * static_cast<double>(pool.size() - 1)));
            theta = pool[idx];
        }
        spec.layers.push_back(LayerThreshold{static_cast<int>(li), mode, theta});
    }
    spec.validate();
    return spec;
}

}  // namespace p2ad

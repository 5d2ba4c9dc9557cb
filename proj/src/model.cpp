#include "p2ad/model.hpp"

#include <cmath>
#include <cstring>
#include <fstream>

#include "p2ad/errors.hpp"
#include "p2ad/rng.hpp"

namespace p2ad {

void ModelSpec::validate() const {
    if (input_height <= 0 || input_width <= 0)
        throw ContractError("input dimensions must be positive");
    if (frac_bits < 1 || frac_bits > 30)
        throw ContractError("frac_bits must be in [1, 30]");
    if (weight_exp_min > weight_exp_max)
        throw ContractError("weight_exp_min > weight_exp_max");
    if (!exact_log2(leaky_slope) || leaky_slope > 1.0)
        throw ContractError("leaky_slope must be a power of two <= 1");
    int h = input_height, w = input_width;
    for (const auto& c : conv_layers) {
        if (c.out_channels <= 0 || c.kernel <= 0 || c.stride <= 0 || c.padding < 0)
            throw ContractError("bad conv layer spec");
        h = conv_output_extent(h, c.kernel, c.stride, c.padding);
        w = conv_output_extent(w, c.kernel, c.stride, c.padding);
        if (h <= 0 || w <= 0)
            throw ContractError("conv stack collapses spatial extent");
    }
    for (int width : fc_hidden)
        if (width <= 0) throw ContractError("fc widths must be positive");
}

int ModelSpec::denoisable_layer_count() const {
    return static_cast<int>(conv_layers.size() + fc_hidden.size());
}

void Model::refresh_quantized_view() {
    for (auto& layer : conv) {
        layer.q_weights = Pow2Tensor::quantize(
            layer.weights,
            {layer.spec.out_channels, layer.in_channels, layer.spec.kernel,
             layer.spec.kernel},
            spec.weight_exp_min, spec.weight_exp_max);
        layer.q_bias.resize(layer.bias.size());
        for (std::size_t i = 0; i < layer.bias.size(); ++i)
            layer.q_bias[i] = encode_fixed(layer.bias[i], spec.frac_bits);
    }
    for (auto& layer : fc) {
        layer.q_weights =
            Pow2Tensor::quantize(layer.weights, {layer.out_features, layer.in_features},
                                 spec.weight_exp_min, spec.weight_exp_max);
        layer.q_bias.resize(layer.bias.size());
        for (std::size_t i = 0; i < layer.bias.size(); ++i)
            layer.q_bias[i] = encode_fixed(layer.bias[i], spec.frac_bits);
    }
}

std::int64_t Model::parameter_count() const {
    std::int64_t n = 0;
    for (const auto& l : conv)
        n += static_cast<std::int64_t>(l.weights.size() + l.bias.size());
    for (const auto& l : fc)
        n += static_cast<std::int64_t>(l.weights.size() + l.bias.size());
    return n;
}

Model build_model(const ModelSpec& spec, std::uint64_t seed) {
    spec.validate();
    Model m;
    m.spec = spec;
    m.negative_slope_log2 = *exact_log2(spec.leaky_slope);

    int in_c = 1, h = spec.input_height, w = spec.input_width;
    int layer_idx = 0;
    for (const auto& cs : spec.conv_layers) {
        ConvLayer layer;
        layer.spec = cs;
        layer.in_channels = in_c;
        const std::size_t n = static_cast<std::size_t>(cs.out_channels) * in_c *
                              cs.kernel * cs.kernel;
        const int fan_in = in_c * cs.kernel * cs.kernel;
        const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
        Rng rng(mix_seed(seed, static_cast<std::uint64_t>(layer_idx++)));
        layer.weights.resize(n);
        for (auto& v : layer.weights) v = rng.uniform(-bound, bound);
        layer.bias.assign(static_cast<std::size_t>(cs.out_channels), 0.0);
        m.conv.push_back(std::move(layer));
        in_c = cs.out_channels;
        h = conv_output_extent(h, cs.kernel, cs.stride, cs.padding);
        w = conv_output_extent(w, cs.kernel, cs.stride, cs.padding);
    }

    int in_features = in_c * h * w;
    std::vector<int> widths = spec.fc_hidden;
    widths.push_back(1);  // sigmoid head
    for (int width : widths) {
        FcLayer layer;
        layer.in_features = in_features;
        layer.out_features = width;
        const double bound = 1.0 / std::sqrt(static_cast<double>(in_features));
        Rng rng(mix_seed(seed, static_cast<std::uint64_t>(layer_idx++)));
        layer.weights.resize(static_cast<std::size_t>(width) * in_features);
        for (auto& v : layer.weights) v = rng.uniform(-bound, bound);
        layer.bias.assign(static_cast<std::size_t>(width), 0.0);
        m.fc.push_back(std::move(layer));
        in_features = width;
    }

    m.refresh_quantized_view();
    return m;
}

namespace {

double zero_fraction(const QTensor& t) {
    std::size_t zeros = 0;
    for (auto v : t.data)
        if (v == 0) ++zeros;
    return static_cast<double>(zeros) / static_cast<double>(t.data.size());
}

double zero_fraction_real(const std::vector<double>& v) {
    std::size_t zeros = 0;
    for (double x : v)
        if (x == 0.0) ++zeros;
    return static_cast<double>(zeros) / static_cast<double>(v.size());
}

const LayerThreshold* lookup(const ThresholdSpec& spec, int layer) {
    return spec.find(layer);
}

void check_threshold_range(const ThresholdSpec& th, const ModelSpec& spec) {
    const int denoisable = spec.denoisable_layer_count();
    for (const auto& entry : th.layers) {
        if (entry.layer_index < 0 || entry.layer_index >= denoisable)
            throw ContractError("thresholds: layer index " +
                                std::to_string(entry.layer_index) +
                                " outside the " + std::to_string(denoisable) +
                                " denoisable layers");
    }
}

}  // namespace

InferenceResult infer(const Model& model, const Image& frame,
                      const ThresholdSpec* thresholds_override) {
    const ModelSpec& spec = model.spec;
    if (frame.width != spec.input_width || frame.height != spec.input_height)
        throw ContractError("infer: frame size does not match model input");
    const ThresholdSpec& th =
        thresholds_override ? *thresholds_override : model.thresholds;
    th.validate();
    check_threshold_range(th, spec);

    InferenceResult result;
    QTensor x = to_fixed(frame.pixels, {1, spec.input_height, spec.input_width},
                         spec.frac_bits);

    int layer_idx = 0;
    for (const auto& layer : model.conv) {
        x = conv2d_shift(x, layer.q_weights, layer.q_bias, layer.spec.stride,
                         layer.spec.padding, result.counter);
        x = leaky_relu(x, model.negative_slope_log2);
        if (const auto* entry = lookup(th, layer_idx)) x = apply_denoising(x, *entry);
        result.per_layer_zero_fraction.push_back(zero_fraction(x));
        ++layer_idx;
    }

    x.shape = {static_cast<int>(x.numel())};
    for (std::size_t i = 0; i < model.fc.size(); ++i) {
        const auto& layer = model.fc[i];
        x = fully_connected_shift(x, layer.q_weights, layer.q_bias, result.counter);
        if (i + 1 < model.fc.size()) {
            x = leaky_relu(x, model.negative_slope_log2);
            if (const auto* entry = lookup(th, layer_idx))
                x = apply_denoising(x, *entry);
            result.per_layer_zero_fraction.push_back(zero_fraction(x));
            ++layer_idx;
        }
    }

    result.score = sigmoid_score(x.data[0], spec.frac_bits);
    return result;
}

InferenceResult infer_real(const Model& model, const Image& frame,
                           const ThresholdSpec* thresholds_override) {
    const ModelSpec& spec = model.spec;
    if (frame.width != spec.input_width || frame.height != spec.input_height)
        throw ContractError("infer: frame size does not match model input");
    const ThresholdSpec& th =
        thresholds_override ? *thresholds_override : model.thresholds;
    th.validate();
    check_threshold_range(th, spec);

    InferenceResult result;
    std::vector<double> x = frame.pixels;
    int c_in = 1, h = spec.input_height, w = spec.input_width;
    const double slope = spec.leaky_slope;

    int layer_idx = 0;
    for (const auto& layer : model.conv) {
        const int k = layer.spec.kernel, stride = layer.spec.stride,
                  pad = layer.spec.padding;
        const int c_out = layer.spec.out_channels;
        const int oh = conv_output_extent(h, k, stride, pad);
        const int ow = conv_output_extent(w, k, stride, pad);
        std::vector<double> y(static_cast<std::size_t>(c_out) * oh * ow);
        std::uint64_t done = 0, skipped = 0;
        for (int oc = 0; oc < c_out; ++oc) {
            const std::size_t wb_oc = static_cast<std::size_t>(oc) * c_in * k * k;
            for (int oy = 0; oy < oh; ++oy) {
                for (int ox = 0; ox < ow; ++ox) {
                    double acc = layer.bias[static_cast<std::size_t>(oc)];
                    const int iy0 = oy * stride - pad, ix0 = ox * stride - pad;
                    for (int ic = 0; ic < c_in; ++ic) {
                        for (int ky = 0; ky < k; ++ky) {
                            const int iy = iy0 + ky;
                            if (iy < 0 || iy >= h) {
                                skipped += k;
                                continue;
                            }
                            for (int kx = 0; kx < k; ++kx) {
                                const int ix = ix0 + kx;
                                if (ix < 0 || ix >= w) {
                                    ++skipped;
                                    continue;
                                }
                                const double a =
                                    x[(static_cast<std::size_t>(ic) * h + iy) * w + ix];
                                const double wt =
                                    layer.weights[wb_oc +
                                                  (static_cast<std::size_t>(ic) * k + ky) * k +
                                                  kx];
                                if (a == 0.0 || wt == 0.0) {
                                    ++skipped;
                                    continue;
                                }
                                acc += a * wt;
                                ++done;
                            }
                        }
                    }
                    y[(static_cast<std::size_t>(oc) * oh + oy) * ow + ox] = acc;
                }
            }
        }
        result.counter.shift_adds_done += done;
        result.counter.accumulates_skipped += skipped;
        result.counter.dense_total += conv2d_dense_total(c_out, oh, ow, c_in, k);

        for (auto& v : y)
            if (v < 0.0) v *= slope;
        if (const auto* entry = lookup(th, layer_idx))
            apply_denoising_real(y, *entry);
        result.per_layer_zero_fraction.push_back(zero_fraction_real(y));
        ++layer_idx;
        x = std::move(y);
        c_in = c_out;
        h = oh;
        w = ow;
    }

    for (std::size_t li = 0; li < model.fc.size(); ++li) {
        const auto& layer = model.fc[li];
        if (static_cast<int>(x.size()) != layer.in_features)
            throw ContractError("infer: fc input size mismatch");
        std::vector<double> y(static_cast<std::size_t>(layer.out_features));
        std::uint64_t done = 0, skipped = 0;
        for (int o = 0; o < layer.out_features; ++o) {
            double acc = layer.bias[static_cast<std::size_t>(o)];
            const std::size_t wb = static_cast<std::size_t>(o) * layer.in_features;
            for (int i = 0; i < layer.in_features; ++i) {
                const double a = x[static_cast<std::size_t>(i)];
                const double wt = layer.weights[wb + static_cast<std::size_t>(i)];
                if (a == 0.0 || wt == 0.0) {
                    ++skipped;
                    continue;
                }
                acc += a * wt;
                ++done;
            }
            y[static_cast<std::size_t>(o)] = acc;
        }
        result.counter.shift_adds_done += done;
        result.counter.accumulates_skipped += skipped;
        result.counter.dense_total +=
            fc_dense_total(layer.out_features, layer.in_features);

        if (li + 1 < model.fc.size()) {
            for (auto& v : y)
                if (v < 0.0) v *= slope;
            if (const auto* entry = lookup(th, layer_idx))
                apply_denoising_real(y, *entry);
            result.per_layer_zero_fraction.push_back(zero_fraction_real(y));
            ++layer_idx;
        }
        x = std::move(y);
    }

    result.score = sigmoid_real(x[0]);
    return result;
}

// ---------------------------------------------------------------------------
// Serialization. All integers little-endian; signs pack 4 per byte
// (00 zero, 01 plus, 10 minus), exponents as int8, fixed-point biases as
// int32, shadow parameters appended as raw float64.

namespace {

constexpr char kMagic[4] = {'P', '2', 'A', 'D'};
constexpr std::uint16_t kVersion = 1;

struct Writer {
    std::ofstream out;

    explicit Writer(const std::string& path)
        : out(path, std::ios::binary | std::ios::trunc) {
        if (!out) throw FileError("cannot write " + path);
    }
    void bytes(const void* p, std::size_t n) {
        out.write(static_cast<const char*>(p), static_cast<std::streamsize>(n));
    }
    template <typename T>
    void pod(T v) {
        bytes(&v, sizeof(T));
    }
};

struct Reader {
    std::ifstream in;
    std::string path;

    explicit Reader(const std::string& p) : in(p, std::ios::binary), path(p) {
        if (!in) throw FileError("cannot open " + p);
    }
    void bytes(void* p, std::size_t n) {
        in.read(static_cast<char*>(p), static_cast<std::streamsize>(n));
        if (static_cast<std::size_t>(in.gcount()) != n)
            throw FormatError(FormatError::Kind::truncated,
                              path + ": unexpected end of model file");
    }
    template <typename T>
    T pod() {
        T v;
        bytes(&v, sizeof(T));
        return v;
    }
};

void write_quantized(Writer& w, const Pow2Tensor& q,
                     std::span<const std::int32_t> bias) {
    const std::size_t n = q.size();
    std::vector<std::uint8_t> packed((n + 3) / 4, 0);
    for (std::size_t i = 0; i < n; ++i) {
        const std::uint8_t code = q.sign[i] == 0 ? 0 : (q.sign[i] > 0 ? 1 : 2);
        packed[i / 4] |= static_cast<std::uint8_t>(code << (2 * (i % 4)));
    }
    w.bytes(packed.data(), packed.size());
    w.bytes(q.exponent.data(), n);
    w.bytes(bias.data(), bias.size() * sizeof(std::int32_t));
}

void read_quantized(Reader& r, Pow2Tensor& q, std::vector<std::int32_t>& bias,
                    std::vector<int> shape, std::size_t bias_n) {
    q.shape = std::move(shape);
    std::size_t n = 1;
    for (int d : q.shape) n *= static_cast<std::size_t>(d);
    std::vector<std::uint8_t> packed((n + 3) / 4);
    r.bytes(packed.data(), packed.size());
    q.sign.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const std::uint8_t code = (packed[i / 4] >> (2 * (i % 4))) & 3;
        if (code == 3)
            throw FormatError(FormatError::Kind::corrupt,
                              r.path + ": invalid packed weight sign");
        q.sign[i] = code == 0 ? 0 : (code == 1 ? 1 : -1);
    }
    q.exponent.resize(n);
    r.bytes(q.exponent.data(), n);
    bias.resize(bias_n);
    r.bytes(bias.data(), bias_n * sizeof(std::int32_t));
}

}  // namespace

void save_model(const Model& model, const std::string& path) {
    Writer w(path);
    w.bytes(kMagic, 4);
    w.pod(kVersion);

    const ModelSpec& s = model.spec;
    w.pod<std::int32_t>(s.frac_bits);
    w.pod<std::int32_t>(s.weight_exp_min);
    w.pod<std::int32_t>(s.weight_exp_max);
    w.pod<std::int32_t>(model.negative_slope_log2);
    w.pod<std::int32_t>(s.input_height);
    w.pod<std::int32_t>(s.input_width);

    w.pod<std::uint32_t>(static_cast<std::uint32_t>(s.conv_layers.size()));
    for (const auto& c : s.conv_layers) {
        w.pod<std::int32_t>(c.out_channels);
        w.pod<std::int32_t>(c.kernel);
        w.pod<std::int32_t>(c.stride);
        w.pod<std::int32_t>(c.padding);
    }
    w.pod<std::uint32_t>(static_cast<std::uint32_t>(s.fc_hidden.size()));
    for (int width : s.fc_hidden) w.pod<std::int32_t>(width);

    w.pod<std::uint32_t>(static_cast<std::uint32_t>(model.thresholds.layers.size()));
    for (const auto& e : model.thresholds.layers) {
        w.pod<std::int32_t>(e.layer_index);
        w.pod<std::uint8_t>(static_cast<std::uint8_t>(e.mode));
        w.pod<double>(e.value);
    }

    for (const auto& l : model.conv) write_quantized(w, l.q_weights, l.q_bias);
    for (const auto& l : model.fc) write_quantized(w, l.q_weights, l.q_bias);

    for (const auto& l : model.conv) {
        w.bytes(l.weights.data(), l.weights.size() * sizeof(double));
        w.bytes(l.bias.data(), l.bias.size() * sizeof(double));
    }
    for (const auto& l : model.fc) {
        w.bytes(l.weights.data(), l.weights.size() * sizeof(double));
        w.bytes(l.bias.data(), l.bias.size() * sizeof(double));
    }
    if (!w.out) throw FileError("write failed: " + path);
}

Model load_model(const std::string& path) {
    Reader r(path);
    char magic[4];
    r.bytes(magic, 4);
    if (std::memcmp(magic, kMagic, 4) != 0)
        throw FormatError(FormatError::Kind::bad_magic, path + ": not a model file");
    const auto version = r.pod<std::uint16_t>();
    if (version != kVersion)
        throw FormatError(FormatError::Kind::bad_version,
                          path + ": unsupported model version " +
                              std::to_string(version));

    Model m;
    ModelSpec s;
    s.frac_bits = r.pod<std::int32_t>();
    s.weight_exp_min = r.pod<std::int32_t>();
    s.weight_exp_max = r.pod<std::int32_t>();
    m.negative_slope_log2 = r.pod<std::int32_t>();
    if (m.negative_slope_log2 > 0 || m.negative_slope_log2 < -30)
        throw FormatError(FormatError::Kind::corrupt, path + ": bad slope exponent");
    s.leaky_slope = std::ldexp(1.0, m.negative_slope_log2);
    s.input_height = r.pod<std::int32_t>();
    s.input_width = r.pod<std::int32_t>();

    const auto conv_n = r.pod<std::uint32_t>();
    if (conv_n > 64)
        throw FormatError(FormatError::Kind::corrupt, path + ": absurd layer count");
    s.conv_layers.clear();
    for (std::uint32_t i = 0; i < conv_n; ++i) {
        ConvLayerSpec c;
        c.out_channels = r.pod<std::int32_t>();
        c.kernel = r.pod<std::int32_t>();
        c.stride = r.pod<std::int32_t>();
        c.padding = r.pod<std::int32_t>();
        s.conv_layers.push_back(c);
    }
    const auto fc_n = r.pod<std::uint32_t>();
    if (fc_n > 64)
        throw FormatError(FormatError::Kind::corrupt, path + ": absurd layer count");
    s.fc_hidden.clear();
    for (std::uint32_t i = 0; i < fc_n; ++i)
        s.fc_hidden.push_back(r.pod<std::int32_t>());
    try {
        s.validate();
    } catch (const ContractError& e) {
        throw FormatError(FormatError::Kind::corrupt,
                          path + ": invalid topology: " + e.what());
    }
    m.spec = s;

    const auto th_n = r.pod<std::uint32_t>();
    if (th_n > 4096)
        throw FormatError(FormatError::Kind::corrupt, path + ": absurd threshold count");
    for (std::uint32_t i = 0; i < th_n; ++i) {
        LayerThreshold e;
        e.layer_index = r.pod<std::int32_t>();
        const auto mode = r.pod<std::uint8_t>();
        if (mode > 3)
            throw FormatError(FormatError::Kind::corrupt, path + ": bad denoise mode");
        e.mode = static_cast<DenoiseMode>(mode);
        e.value = r.pod<double>();
        m.thresholds.layers.push_back(e);
    }
    try {
        m.thresholds.validate();
    } catch (const ContractError& e) {
        throw FormatError(FormatError::Kind::corrupt,
                          path + ": invalid thresholds: " + e.what());
    }

    // Materialize layer shells from the topology, then fill both views.
    int in_c = 1, h = s.input_height, w = s.input_width;
    for (const auto& cs : s.conv_layers) {
        ConvLayer layer;
        layer.spec = cs;
        layer.in_channels = in_c;
        m.conv.push_back(std::move(layer));
        in_c = cs.out_channels;
        h = conv_output_extent(h, cs.kernel, cs.stride, cs.padding);
        w = conv_output_extent(w, cs.kernel, cs.stride, cs.padding);
    }
    int in_features = in_c * h * w;
    std::vector<int> widths = s.fc_hidden;
    widths.push_back(1);
    for (int width : widths) {
        FcLayer layer;
        layer.in_features = in_features;
        layer.out_features = width;
        m.fc.push_back(std::move(layer));
        in_features = width;
    }

    for (auto& l : m.conv)
        read_quantized(r, l.q_weights, l.q_bias,
                       {l.spec.out_channels, l.in_channels, l.spec.kernel,
                        l.spec.kernel},
                       static_cast<std::size_t>(l.spec.out_channels));
    for (auto& l : m.fc)
        read_quantized(r, l.q_weights, l.q_bias, {l.out_features, l.in_features},
                       static_cast<std::size_t>(l.out_features));

    for (auto& l : m.conv) {
        l.weights.resize(l.q_weights.size());
        r.bytes(l.weights.data(), l.weights.size() * sizeof(double));
        l.bias.resize(l.q_bias.size());
        r.bytes(l.bias.data(), l.bias.size() * sizeof(double));
    }
    for (auto& l : m.fc) {
        l.weights.resize(l.q_weights.size());
        r.bytes(l.weights.data(), l.weights.size() * sizeof(double));
        l.bias.resize(l.q_bias.size());
        r.bytes(l.bias.data(), l.bias.size() * sizeof(double));
    }

    for (const auto& l : m.conv)
        for (std::size_t i = 0; i < l.q_weights.size(); ++i)
            if (l.q_weights.sign[i] != 0 &&
                (l.q_weights.exponent[i] < s.weight_exp_min ||
                 l.q_weights.exponent[i] > s.weight_exp_max))
                throw FormatError(FormatError::Kind::corrupt,
                                  path + ": weight exponent out of range");
    return m;
}

}  // namespace p2ad

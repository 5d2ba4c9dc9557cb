#include "p2ad/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "p2ad/errors.hpp"
#include "p2ad/flow.hpp"
#include "p2ad/manifest.hpp"

namespace p2ad {

void SynthParams::validate() const {
    if (image_size < 8) throw ContractError("image_size must be >= 8");
    if (ped_count_lo < 0 || ped_count_hi < ped_count_lo)
        throw ContractError("bad pedestrian count range");
    if (!(ped_sigma_lo > 0.0) || ped_sigma_hi < ped_sigma_lo)
        throw ContractError("bad pedestrian sigma range");
    if (!(ped_speed_lo > 0.0) || ped_speed_hi < ped_speed_lo)
        throw ContractError("bad pedestrian speed range");
    if (!(anomaly_sigma_lo > 0.0) || anomaly_sigma_hi < anomaly_sigma_lo)
        throw ContractError("bad anomaly sigma range");
    if (anomaly_speed_hi < anomaly_speed_lo)
        throw ContractError("bad anomaly speed range");
    if (anomaly_speed_lo <= ped_speed_hi)
        throw ContractError("anomaly speeds must exceed pedestrian speeds");
    if (blur_radius < 0) throw ContractError("blur_radius must be >= 0");
}

namespace {

// Writes max(existing, peak * gaussian) over the blob's 3-sigma support.
void splat_blob_max(Image& img, double cx, double cy, double sigma,
                    double peak) {
    const int r = static_cast<int>(std::ceil(3.0 * sigma));
    const int x0 = std::max(0, static_cast<int>(std::floor(cx)) - r);
    const int x1 = std::min(img.width - 1, static_cast<int>(std::ceil(cx)) + r);
    const int y0 = std::max(0, static_cast<int>(std::floor(cy)) - r);
    const int y1 = std::min(img.height - 1, static_cast<int>(std::ceil(cy)) + r);
    const double inv = 1.0 / (2.0 * sigma * sigma);
    for (int y = y0; y <= y1; ++y) {
        for (int x = x0; x <= x1; ++x) {
            const double dx = x - cx, dy = y - cy;
            const double v = peak * std::exp(-(dx * dx + dy * dy) * inv);
            if (v > img.at(x, y)) img.at(x, y) = v;
        }
    }
}

}  // namespace

Image synth_frame(const SynthParams& params, int label, Rng& rng) {
    params.validate();
    if (label != 0 && label != 1) throw ContractError("label must be 0 or 1");
    const int s = params.image_size;
    Image img(s, s);

    const int peds = rng.uniform_int(params.ped_count_lo, params.ped_count_hi);
    for (int i = 0; i < peds; ++i) {
        const double cx = rng.uniform(0.0, s - 1.0);
        const double cy = rng.uniform(0.0, s - 1.0);
        const double sigma = rng.uniform(params.ped_sigma_lo, params.ped_sigma_hi);
        const double speed = rng.uniform(params.ped_speed_lo, params.ped_speed_hi);
        splat_blob_max(img, cx, cy, sigma, speed);
    }
    if (label == 1) {
        const double cx = rng.uniform(0.0, s - 1.0);
        const double cy = rng.uniform(0.0, s - 1.0);
        const double sigma =
            rng.uniform(params.anomaly_sigma_lo, params.anomaly_sigma_hi);
        const double speed =
            rng.uniform(params.anomaly_speed_lo, params.anomaly_speed_hi);
        splat_blob_max(img, cx, cy, sigma, speed);
    }
    return box_blur(img, params.blur_radius);
}

Image add_noise_blobs(const Image& image, int blob_count,
                      const NoiseParams& noise, Rng& rng) {
    if (blob_count < 0) throw ContractError("blob_count must be >= 0");
    if (!(noise.sigma > 0.0)) throw ContractError("noise sigma must be > 0");
    if (noise.peak_hi < noise.peak_lo || noise.peak_lo < 0.0)
        throw ContractError("bad noise peak range");
    Image out = image;
    const double inv = 1.0 / (2.0 * noise.sigma * noise.sigma);
    const int r = static_cast<int>(std::ceil(3.0 * noise.sigma));
    for (int b = 0; b < blob_count; ++b) {
        const double cx = rng.uniform(0.0, out.width - 1.0);
        const double cy = rng.uniform(0.0, out.height - 1.0);
        const double peak = rng.uniform(noise.peak_lo, noise.peak_hi);
        const int x0 = std::max(0, static_cast<int>(std::floor(cx)) - r);
        const int x1 = std::min(out.width - 1, static_cast<int>(std::ceil(cx)) + r);
        const int y0 = std::max(0, static_cast<int>(std::floor(cy)) - r);
        const int y1 = std::min(out.height - 1, static_cast<int>(std::ceil(cy)) + r);
        for (int y = y0; y <= y1; ++y) {
            for (int x = x0; x <= x1; ++x) {
                const double dx = x - cx, dy = y - cy;
                out.at(x, y) += peak * std::exp(-(dx * dx + dy * dy) * inv);
            }
        }
    }
    for (auto& p : out.pixels)
        if (p < 0.0) p = 0.0;
    return out;
}

Dataset make_dataset(const SynthParams& params, int n_normal, int n_anomalous,
                     std::uint64_t seed, double train_ratio) {
    params.validate();
    if (n_normal < 0 || n_anomalous < 0)
        throw ContractError("frame counts must be >= 0");
    if (!(train_ratio >= 0.0) || !(train_ratio <= 1.0))
        throw ContractError("train_ratio must be in [0, 1]");

    // Each frame gets its own rng substream so generation order (or a
    // future parallel fill) cannot change the content.
    const int total = n_normal + n_anomalous;
    std::vector<LabeledFrame> frames(static_cast<std::size_t>(total));
    for (int i = 0; i < total; ++i) {
        const int label = i < n_normal ? 0 : 1;
        Rng rng(mix_seed(seed, static_cast<std::uint64_t>(i)));
        frames[static_cast<std::size_t>(i)] =
            LabeledFrame{synth_frame(params, label, rng), label};
    }

    // Stratified split: shuffle each class separately, then cut.
    Dataset ds;
    Rng split_rng(mix_seed(seed, 0x5eed5p11));
    auto split_class = [&](int begin, int count) {
        std::vector<int> idx(static_cast<std::size_t>(count));
        for (int i = 0; i < count; ++i) idx[static_cast<std::size_t>(i)] = begin + i;
        split_rng.shuffle(idx);
        const int n_train = static_cast<int>(
            std::llround(train_ratio * static_cast<double>(count)));
        for (int i = 0; i < count; ++i) {
            auto& dst = i < n_train ? ds.train : ds.test;
            dst.push_back(frames[static_cast<std::size_t>(idx[static_cast<std::size_t>(i)])]);
        }
    };
    split_class(0, n_normal);
    split_class(n_normal, n_anomalous);

    // Interleave so mini-batches see both classes even without shuffling.
    Rng order_rng(mix_seed(seed, 0x0bdeb5));
    std::vector<int> train_order(ds.train.size());
    for (std::size_t i = 0; i < train_order.size(); ++i)
        train_order[i] = static_cast<int>(i);
    order_rng.shuffle(train_order);
    std::vector<LabeledFrame> shuffled(ds.train.size());
    for (std::size_t i = 0; i < train_order.size(); ++i)
        shuffled[i] = ds.train[static_cast<std::size_t>(train_order[i])];
    ds.train = std::move(shuffled);
    return ds;
}

std::uint64_t dataset_hash(const Dataset& dataset) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    auto mix_frames = [&](const std::vector<LabeledFrame>& frames) {
        for (const auto& f : frames) {
            const unsigned char lab = static_cast<unsigned char>(f.label);
            h = fnv1a64(&lab, 1, h);
            h = fnv1a64(f.image.pixels.data(),
                        f.image.pixels.size() * sizeof(double), h);
        }
    };
    mix_frames(dataset.train);
    mix_frames(dataset.test);
    return h;
}

namespace {

FlowField magnitude_as_flow(const Image& img) {
    FlowField f(img.width, img.height);
    for (std::size_t i = 0; i < img.pixels.size(); ++i)
        f.u[i] = static_cast<float>(img.pixels[i]);
    return f;
}

void save_split(const std::vector<LabeledFrame>& frames,
                const std::filesystem::path& dir, const std::string& list_name,
                int& counter) {
    std::string listing;
    for (const auto& f : frames) {
        char name[32];
        std::snprintf(name, sizeof(name), "frame_%06d.flo", counter++);
        write_flo(magnitude_as_flow(f.image), (dir / "frames" / name).string());
        listing += std::string("frames/") + name + " " +
                   std::to_string(f.label) + "\n";
    }
    atomic_write_file((dir / list_name).string(), listing);
}

std::vector<LabeledFrame> load_split(const std::filesystem::path& dir,
                                     const std::string& list_name) {
    std::ifstream in(dir / list_name);
    if (!in) throw FileError("cannot open " + (dir / list_name).string());
    std::vector<LabeledFrame> frames;
    std::string rel;
    int label = 0;
    while (in >> rel >> label) {
        if (label != 0 && label != 1)
            throw FormatError(FormatError::Kind::corrupt,
                              list_name + ": label must be 0 or 1");
        const FlowField f = read_flo((dir / rel).string());
        frames.push_back(LabeledFrame{f.magnitude(), label});
    }
    return frames;
}

}  // namespace

void save_dataset(const Dataset& dataset, const std::string& dir) {
    const std::filesystem::path root(dir);
    std::filesystem::create_directories(root / "frames");
    int counter = 0;
    save_split(dataset.train, root, "train.txt", counter);
    save_split(dataset.test, root, "test.txt", counter);
}

Dataset load_dataset(const std::string& dir) {
    const std::filesystem::path root(dir);
    Dataset ds;
    ds.train = load_split(root, "train.txt");
    ds.test = load_split(root, "test.txt");
    return ds;
}

}  // namespace p2ad

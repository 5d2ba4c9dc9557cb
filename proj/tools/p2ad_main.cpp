// p2ad: multiplication-free anomaly detection on flow-magnitude images.
// Subcommands: gen-data | train | eval | bench | flow. Every run records a
// manifest next to its outputs. Exit codes: 0 success, 1 usage or config
// error, 2 data or contract error.

#include <chrono>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "p2ad/config.hpp"
#include "p2ad/errors.hpp"
#include "p2ad/eval.hpp"
#include "p2ad/flow.hpp"
#include "p2ad/image.hpp"
#include "p2ad/manifest.hpp"
#include "p2ad/model.hpp"
#include "p2ad/synth.hpp"
#include "p2ad/train.hpp"

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

// A usage-level failure (bad flag combinations, bad config file). Library
// ContractError outside the option-resolution phase means bad data and
// maps to exit code 2 instead.
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

p2ad::KeyValueConfig load_config(const std::string& path) {
    if (path.empty()) return {};
    try {
        return p2ad::KeyValueConfig::from_file(path);
    } catch (const p2ad::ContractError& e) {
        throw UsageError(e.what());
    } catch (const p2ad::FileError& e) {
        throw UsageError(e.what());
    }
}

void finish_config(const p2ad::KeyValueConfig& cfg) {
    try {
        cfg.finish();
    } catch (const p2ad::ContractError& e) {
        throw UsageError(e.what());
    }
}

void save_model_atomic(const p2ad::Model& model, const std::string& path) {
    const std::string tmp = path + ".tmp";
    p2ad::save_model(model, tmp);
    std::filesystem::rename(tmp, path);
}

// --- gen-data ---------------------------------------------------------

struct GenDataArgs {
    std::string out;
    std::string config_path;
    std::uint64_t seed = 0;
    int normal = 100;
    int anomalous = 100;
    double train_ratio = 2.0 / 3.0;
};

int cmd_gen_data(const GenDataArgs& args, const CLI::App& sub) {
    const auto start = Clock::now();
    p2ad::KeyValueConfig cfg = load_config(args.config_path);

    p2ad::SynthParams params;
    params.image_size = static_cast<int>(cfg.get_int("image_size", params.image_size));
    params.ped_count_lo = static_cast<int>(cfg.get_int("ped_count_lo", params.ped_count_lo));
    params.ped_count_hi = static_cast<int>(cfg.get_int("ped_count_hi", params.ped_count_hi));
    params.ped_sigma_lo = cfg.get_double("ped_sigma_lo", params.ped_sigma_lo);
    params.ped_sigma_hi = cfg.get_double("ped_sigma_hi", params.ped_sigma_hi);
    params.ped_speed_lo = cfg.get_double("ped_speed_lo", params.ped_speed_lo);
    params.ped_speed_hi = cfg.get_double("ped_speed_hi", params.ped_speed_hi);
    params.anomaly_sigma_lo = cfg.get_double("anomaly_sigma_lo", params.anomaly_sigma_lo);
    params.anomaly_sigma_hi = cfg.get_double("anomaly_sigma_hi", params.anomaly_sigma_hi);
    params.anomaly_speed_lo = cfg.get_double("anomaly_speed_lo", params.anomaly_speed_lo);
    params.anomaly_speed_hi = cfg.get_double("anomaly_speed_hi", params.anomaly_speed_hi);
    params.blur_radius = static_cast<int>(cfg.get_int("blur_radius", params.blur_radius));

    // Config first, command line second: flags override the file, and the
    // file's keys always count as consumed.
    int normal = static_cast<int>(cfg.get_int("normal", args.normal));
    if (sub.count("--normal")) normal = args.normal;
    int anomalous = static_cast<int>(cfg.get_int("anomalous", args.anomalous));
    if (sub.count("--anomalous")) anomalous = args.anomalous;
    double ratio = cfg.get_double("train_ratio", args.train_ratio);
    if (sub.count("--train-ratio")) ratio = args.train_ratio;
    std::uint64_t seed = static_cast<std::uint64_t>(
        cfg.get_int("seed", static_cast<std::int64_t>(args.seed)));
    if (sub.count("--seed")) seed = args.seed;
    params.seed = seed;
    finish_config(cfg);

    const p2ad::Dataset ds = p2ad::make_dataset(params, normal, anomalous, seed, ratio);
    p2ad::save_dataset(ds, args.out);
    const std::uint64_t hash = p2ad::dataset_hash(ds);

    p2ad::RunManifest m;
    m.subcommand = "gen-data";
    m.seed = seed;
    m.add("normal", static_cast<std::int64_t>(normal));
    m.add("anomalous", static_cast<std::int64_t>(anomalous));
    m.add("train_ratio", ratio);
    m.add("image_size", static_cast<std::int64_t>(params.image_size));
    m.add("blur_radius", static_cast<std::int64_t>(params.blur_radius));
    m.add("train_frames", static_cast<std::int64_t>(ds.train.size()));
    m.add("test_frames", static_cast<std::int64_t>(ds.test.size()));
    m.add("content_hash", p2ad::to_hex(hash));
    m.outputs.push_back(args.out);
    m.duration_seconds = seconds_since(start);
    m.write((std::filesystem::path(args.out) / "manifest.json").string());

    std::printf("wrote %zu train + %zu test frames to %s (hash %s)\n",
                ds.train.size(), ds.test.size(), args.out.c_str(),
                p2ad::to_hex(hash).c_str());
    return 0;
}

// --- train ------------------------------------------------------------

struct TrainArgs {
    std::string data;
    std::string out = "model.p2ad";
    std::string config_path;
    std::uint64_t seed = 0;
    int epochs = 0;        // 0 = from config/default
    int batch_size = 0;
    double lr = 0.0;
    double loss_stop = -1.0;
    std::vector<double> theta_quantile;
    bool regular = false;  // train the unquantized baseline network
};

int cmd_train(const TrainArgs& args, const CLI::App& sub) {
    const auto start = Clock::now();
    p2ad::KeyValueConfig cfg = load_config(args.config_path);

    // Config first, command line second (same contract as gen-data).
    p2ad::TrainConfig tc;
    tc.epochs_max = static_cast<int>(cfg.get_int("epochs_max", tc.epochs_max));
    if (sub.count("--epochs")) tc.epochs_max = args.epochs;
    tc.batch_size = static_cast<int>(cfg.get_int("batch_size", tc.batch_size));
    if (sub.count("--batch-size")) tc.batch_size = args.batch_size;
    tc.learning_rate = cfg.get_double("learning_rate", tc.learning_rate);
    if (sub.count("--lr")) tc.learning_rate = args.lr;
    tc.loss_stop = cfg.get_double("loss_stop", tc.loss_stop);
    if (sub.count("--loss-stop")) tc.loss_stop = args.loss_stop;
    tc.seed = static_cast<std::uint64_t>(
        cfg.get_int("seed", static_cast<std::int64_t>(args.seed)));
    if (sub.count("--seed")) tc.seed = args.seed;
    tc.quantize_per_epoch = cfg.get_bool("quantize_per_epoch", true);
    if (sub.count("--regular")) tc.quantize_per_epoch = !args.regular;
    if (cfg.has("theta_quantile_1")) {
        tc.theta_quantile = {cfg.get_double("theta_quantile_1", 0.0),
                             cfg.get_double("theta_quantile_2", 0.0)};
    }
    if (!args.theta_quantile.empty()) tc.theta_quantile = args.theta_quantile;

    p2ad::ModelSpec spec;
    spec.input_height = static_cast<int>(cfg.get_int("input_size", spec.input_height));
    spec.input_width = spec.input_height;
    spec.frac_bits = static_cast<int>(cfg.get_int("frac_bits", spec.frac_bits));
    finish_config(cfg);

    const p2ad::Dataset ds = p2ad::load_dataset(args.data);
    const p2ad::TrainResult result = p2ad::train(ds.train, spec, tc);
    save_model_atomic(result.model, args.out);

    p2ad::RunManifest m;
    m.subcommand = "train";
    m.seed = tc.seed;
    m.add("epochs_max", static_cast<std::int64_t>(tc.epochs_max));
    m.add("batch_size", static_cast<std::int64_t>(tc.batch_size));
    m.add("learning_rate", tc.learning_rate);
    m.add("loss_stop", tc.loss_stop);
    m.add("quantize_per_epoch", std::string(tc.quantize_per_epoch ? "true" : "false"));
    m.add("epochs_run", static_cast<std::int64_t>(result.epochs_run));
    m.add("final_loss", result.final_loss);
    m.add("train_frames", static_cast<std::int64_t>(ds.train.size()));
    m.add("model_hash", p2ad::to_hex(p2ad::hash_file(args.out, 0xcbf29ce484222325ULL)));
    m.inputs.push_back(args.data);
    m.outputs.push_back(args.out);
    m.duration_seconds = seconds_since(start);
    m.write(args.out + ".manifest.json");

    std::printf("trained %d epochs, final loss %.6f -> %s\n", result.epochs_run,
                result.final_loss, args.out.c_str());
    return 0;
}

// --- eval -------------------------------------------------------------

p2ad::SweepThresholds parse_grid_cell(const std::string& text) {
    p2ad::SweepThresholds cell;
    std::vector<std::string> parts;
    std::string cur;
    for (char c : text) {
        if (c == ':') {
            parts.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    parts.push_back(cur);
    if (parts.empty() || parts.size() > 3)
        throw UsageError("bad grid cell: " + text);
    try {
        cell.mode = p2ad::denoise_mode_from_string(parts[0]);
    } catch (const p2ad::ContractError& e) {
        throw UsageError(e.what());
    }
    auto parse_theta = [&](const std::string& s) -> std::optional<double> {
        if (s.empty() || s == "-") return std::nullopt;
        char* end = nullptr;
        const double v = std::strtod(s.c_str(), &end);
        if (end == s.c_str() || *end != '\0')
            throw UsageError("bad theta in grid cell: " + text);
        return v;
    };
    if (parts.size() > 1) cell.theta1 = parse_theta(parts[1]);
    if (parts.size() > 2) cell.theta2 = parse_theta(parts[2]);
    return cell;
}

struct EvalArgs {
    std::string data;
    std::string model;
    std::string regular_model;
    std::string out = "report.csv";
    std::string roc_dir;
    std::uint64_t seed = 0;
    std::vector<int> noise_levels = {0, 5, 10, 20};
    std::vector<std::string> grid = {"none", "soft:0.009:0.01", "soft:0.1:0.01"};
    double noise_sigma = 4.0;
};

int cmd_eval(const EvalArgs& args) {
    const auto start = Clock::now();
    p2ad::SweepOptions options;
    options.seed = args.seed;
    options.noise_levels = args.noise_levels;
    options.noise.sigma = args.noise_sigma;
    for (const auto& cell : args.grid)
        options.configs.push_back(parse_grid_cell(cell));

    const p2ad::Model pow2 = p2ad::load_model(args.model);
    const bool have_regular = !args.regular_model.empty();
    const p2ad::Model regular =
        have_regular ? p2ad::load_model(args.regular_model) : pow2;
    const p2ad::Dataset ds = p2ad::load_dataset(args.data);

    p2ad::EvalReport report = p2ad::sweep(regular, pow2, ds.test, options);
    if (!have_regular) {
        std::erase_if(report.rows, [](const p2ad::EvalRow& r) {
            return r.network == p2ad::NetworkKind::regular;
        });
    }
    p2ad::emit_csv(report, args.out);
    if (!args.roc_dir.empty()) p2ad::emit_roc_points(report, args.roc_dir);

    p2ad::RunManifest m;
    m.subcommand = "eval";
    m.seed = args.seed;
    std::string levels;
    for (int l : args.noise_levels) levels += (levels.empty() ? "" : ",") + std::to_string(l);
    m.add("noise_levels", levels);
    std::string grid;
    for (const auto& g : args.grid) grid += (grid.empty() ? "" : ";") + g;
    m.add("grid", grid);
    m.add("noise_sigma", args.noise_sigma);
    m.add("test_frames", static_cast<std::int64_t>(ds.test.size()));
    m.add("rows", static_cast<std::int64_t>(report.rows.size()));
    m.inputs.push_back(args.data);
    m.inputs.push_back(args.model);
    if (have_regular) m.inputs.push_back(args.regular_model);
    m.outputs.push_back(args.out);
    if (!args.roc_dir.empty()) m.outputs.push_back(args.roc_dir);
    m.duration_seconds = seconds_since(start);
    m.write(args.out + ".manifest.json");

    std::printf("wrote %zu rows to %s\n", report.rows.size(), args.out.c_str());
    return 0;
}

// --- bench ------------------------------------------------------------

struct BenchArgs {
    std::string data;
    std::string model;
    std::string out;
    std::string mode = "model";  // model = use thresholds stored in the file
    double theta1 = -1.0;
    double theta2 = -1.0;
};

int cmd_bench(const BenchArgs& args) {
    const auto start = Clock::now();
    const p2ad::Model model = p2ad::load_model(args.model);
    const p2ad::Dataset ds = p2ad::load_dataset(args.data);
    if (ds.test.empty()) throw p2ad::ContractError("bench: empty test split");

    std::optional<p2ad::ThresholdSpec> th_override;
    if (args.mode != "model") {
        p2ad::SweepThresholds cell;
        cell.mode = p2ad::denoise_mode_from_string(args.mode);
        if (args.theta1 >= 0.0) cell.theta1 = args.theta1;
        if (args.theta2 >= 0.0) cell.theta2 = args.theta2;
        th_override = cell.to_spec();
    }
    const p2ad::ThresholdSpec none;

    p2ad::OpCounter total, baseline_total;
    std::vector<p2ad::OpCounter> per_layer;
    const auto infer_start = Clock::now();
    for (const auto& frame : ds.test) {
        const p2ad::InferenceResult res =
            p2ad::infer(model, frame.image, th_override ? &*th_override : nullptr);
        total += res.counter;
    }
    const double infer_seconds = seconds_since(infer_start);
    for (const auto& frame : ds.test) {
        const p2ad::InferenceResult res = p2ad::infer(model, frame.image, &none);
        baseline_total += res.counter;
    }

    // Per-layer counters from an explicit pass over the first frame, same
    // kernels and threshold handling as infer.
    {
        const p2ad::ThresholdSpec& th =
            th_override ? *th_override : model.thresholds;
        const p2ad::Image& frame = ds.test.front().image;
        p2ad::QTensor x = p2ad::to_fixed(
            frame.pixels, {1, model.spec.input_height, model.spec.input_width},
            model.spec.frac_bits);
        int layer_idx = 0;
        for (const auto& layer : model.conv) {
            p2ad::OpCounter c;
            x = p2ad::conv2d_shift(x, layer.q_weights, layer.q_bias,
                                   layer.spec.stride, layer.spec.padding, c);
            x = p2ad::leaky_relu(x, model.negative_slope_log2);
            if (const auto* entry = th.find(layer_idx))
                x = p2ad::apply_denoising(x, *entry);
            per_layer.push_back(c);
            ++layer_idx;
        }
        x.shape = {static_cast<int>(x.numel())};
        for (std::size_t i = 0; i < model.fc.size(); ++i) {
            p2ad::OpCounter c;
            x = p2ad::fully_connected_shift(x, model.fc[i].q_weights,
                                            model.fc[i].q_bias, c);
            if (i + 1 < model.fc.size()) {
                x = p2ad::leaky_relu(x, model.negative_slope_log2);
                if (const auto* entry = th.find(layer_idx))
                    x = p2ad::apply_denoising(x, *entry);
                ++layer_idx;
            }
            per_layer.push_back(c);
        }
    }

    const double savings = 100.0 * total.savings_fraction();
    const double attributable =
        savings - 100.0 * baseline_total.savings_fraction();
    const double fps = static_cast<double>(ds.test.size()) / infer_seconds;

    std::string summary;
    char line[256];
    std::snprintf(line, sizeof(line), "frames: %zu\n", ds.test.size());
    summary += line;
    std::snprintf(line, sizeof(line), "dense_total: %llu\n",
                  static_cast<unsigned long long>(total.dense_total));
    summary += line;
    std::snprintf(line, sizeof(line), "shift_adds_done: %llu\n",
                  static_cast<unsigned long long>(total.shift_adds_done));
    summary += line;
    std::snprintf(line, sizeof(line), "accumulates_skipped: %llu\n",
                  static_cast<unsigned long long>(total.accumulates_skipped));
    summary += line;
    std::snprintf(line, sizeof(line), "savings_pct: %.4f\n", savings);
    summary += line;
    std::snprintf(line, sizeof(line), "denoising_attributable_savings_pct: %.4f\n",
                  attributable);
    summary += line;
    std::snprintf(line, sizeof(line), "frames_per_sec: %.2f\n", fps);
    summary += line;
    for (std::size_t i = 0; i < per_layer.size(); ++i) {
        std::snprintf(line, sizeof(line), "layer_%zu_savings_pct: %.4f\n", i + 1,
                      100.0 * per_layer[i].savings_fraction());
        summary += line;
    }
    std::fputs(summary.c_str(), stdout);

    if (!args.out.empty()) {
        p2ad::atomic_write_file(args.out, summary);
        p2ad::RunManifest m;
        m.subcommand = "bench";
        m.add("mode", args.mode);
        if (args.theta1 >= 0.0) m.add("theta1", args.theta1);
        if (args.theta2 >= 0.0) m.add("theta2", args.theta2);
        m.add("frames", static_cast<std::int64_t>(ds.test.size()));
        m.add("savings_pct", savings);
        m.inputs.push_back(args.model);
        m.inputs.push_back(args.data);
        m.outputs.push_back(args.out);
        m.duration_seconds = seconds_since(start);
        m.write(args.out + ".manifest.json");
    }
    return 0;
}

// --- flow -------------------------------------------------------------

struct FlowArgs {
    std::string frame_a;
    std::string frame_b;
    std::string flo_in;
    std::string out;      // magnitude image (.pgm)
    std::string out_flo;  // estimated field
    int window = 15;
    int iterations = 3;
};

int cmd_flow(const FlowArgs& args) {
    const auto start = Clock::now();
    p2ad::FlowField field;
    if (!args.flo_in.empty()) {
        if (!args.frame_a.empty() || !args.frame_b.empty())
            throw UsageError("--flo excludes --frame-a/--frame-b");
        field = p2ad::read_flo(args.flo_in);
    } else {
        if (args.frame_a.empty() || args.frame_b.empty())
            throw UsageError("need either --flo or both --frame-a and --frame-b");
        const p2ad::Image a = p2ad::read_pgm(args.frame_a);
        const p2ad::Image b = p2ad::read_pgm(args.frame_b);
        field = p2ad::farneback_flow(a, b, args.window, args.iterations);
    }

    const p2ad::Image mag = field.magnitude();
    std::printf("max_magnitude: %.9f\nmean_magnitude: %.9f\n", mag.max_value(),
                mag.mean_value());

    std::vector<std::string> outputs;
    if (!args.out.empty()) {
        // Normalize for the 8-bit container; raw values live in the .flo.
        p2ad::Image norm = mag;
        const double peak = norm.max_value();
        if (peak > 0.0)
            for (auto& p : norm.pixels) p /= peak;
        p2ad::write_pgm(norm, args.out);
        outputs.push_back(args.out);
    }
    if (!args.out_flo.empty()) {
        p2ad::write_flo(field, args.out_flo);
        outputs.push_back(args.out_flo);
    }

    if (!outputs.empty()) {
        p2ad::RunManifest m;
        m.subcommand = "flow";
        m.add("window", static_cast<std::int64_t>(args.window));
        m.add("iterations", static_cast<std::int64_t>(args.iterations));
        m.add("max_magnitude", mag.max_value());
        if (!args.flo_in.empty()) m.inputs.push_back(args.flo_in);
        if (!args.frame_a.empty()) m.inputs.push_back(args.frame_a);
        if (!args.frame_b.empty()) m.inputs.push_back(args.frame_b);
        m.outputs = outputs;
        m.duration_seconds = seconds_since(start);
        m.write(outputs.front() + ".manifest.json");
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Multiplication-free optical-flow anomaly detection"};
    app.require_subcommand(1);

    GenDataArgs gen_args;
    auto* gen = app.add_subcommand("gen-data", "Generate a synthetic labeled dataset");
    gen->add_option("--out", gen_args.out, "Output directory")->required();
    gen->add_option("--config", gen_args.config_path, "Config file");
    gen->add_option("--seed", gen_args.seed, "RNG seed");
    gen->add_option("--normal", gen_args.normal, "Normal frame count");
    gen->add_option("--anomalous", gen_args.anomalous, "Anomalous frame count");
    gen->add_option("--train-ratio", gen_args.train_ratio, "Train split fraction");

    TrainArgs train_args;
    auto* tr = app.add_subcommand("train", "Train a model on a generated dataset");
    tr->add_option("--data", train_args.data, "Dataset directory")->required();
    tr->add_option("--out", train_args.out, "Model output path");
    tr->add_option("--config", train_args.config_path, "Config file");
    tr->add_option("--seed", train_args.seed, "RNG seed");
    tr->add_option("--epochs", train_args.epochs, "Max epochs");
    tr->add_option("--batch-size", train_args.batch_size, "Mini-batch size");
    tr->add_option("--lr", train_args.lr, "Learning rate");
    tr->add_option("--loss-stop", train_args.loss_stop, "Early-stop BCE threshold");
    tr->add_option("--theta-quantile", train_args.theta_quantile,
                   "Per-conv-layer activation quantile for theta calibration")
        ->delimiter(',');
    tr->add_flag("--regular", train_args.regular,
                 "Train the real-weight baseline (no pow2 quantization)");

    EvalArgs eval_args;
    auto* ev = app.add_subcommand("eval", "Threshold x noise sweep report");
    ev->add_option("--data", eval_args.data, "Dataset directory")->required();
    ev->add_option("--model", eval_args.model, "Pow2 model file")->required();
    ev->add_option("--regular-model", eval_args.regular_model,
                   "Baseline model file (adds regular rows)");
    ev->add_option("--out", eval_args.out, "Report CSV path");
    ev->add_option("--roc-dir", eval_args.roc_dir, "Directory for ROC point files");
    ev->add_option("--seed", eval_args.seed, "Noise RNG seed");
    ev->add_option("--noise-levels", eval_args.noise_levels, "Blob counts")
        ->delimiter(',');
    ev->add_option("--grid", eval_args.grid,
                   "Threshold cells as mode[:theta1[:theta2]]")
        ->delimiter(';');
    ev->add_option("--noise-sigma", eval_args.noise_sigma, "Noise blob sigma (px)");

    BenchArgs bench_args;
    auto* be = app.add_subcommand("bench", "Operation-count benchmark");
    be->add_option("--data", bench_args.data, "Dataset directory")->required();
    be->add_option("--model", bench_args.model, "Model file")->required();
    be->add_option("--out", bench_args.out, "Summary output path");
    be->add_option("--mode", bench_args.mode,
                   "Denoising mode (model|none|soft|hard|l1_ball)");
    be->add_option("--theta1", bench_args.theta1, "Layer 1 theta");
    be->add_option("--theta2", bench_args.theta2, "Layer 2 theta");

    FlowArgs flow_args;
    auto* fl = app.add_subcommand("flow", "Dense optical flow / .flo inspection");
    fl->add_option("--frame-a", flow_args.frame_a, "First frame (PGM)");
    fl->add_option("--frame-b", flow_args.frame_b, "Second frame (PGM)");
    fl->add_option("--flo", flow_args.flo_in, "Existing .flo field (bypasses estimation)");
    fl->add_option("--out", flow_args.out, "Magnitude image output (PGM)");
    fl->add_option("--out-flo", flow_args.out_flo, "Flow field output (.flo)");
    fl->add_option("--window", flow_args.window, "Polynomial expansion window");
    fl->add_option("--iterations", flow_args.iterations, "Refinement iterations");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (*gen) return cmd_gen_data(gen_args, *gen);
        if (*tr) return cmd_train(train_args, *tr);
        if (*ev) return cmd_eval(eval_args);
        if (*be) return cmd_bench(bench_args);
        if (*fl) return cmd_flow(flow_args);
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const p2ad::ContractError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const p2ad::FormatError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const p2ad::FileError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 1;
}

#include "p2ad/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <sstream>

#include "p2ad/errors.hpp"
#include "p2ad/manifest.hpp"
#include "p2ad/parallel.hpp"
#include "p2ad/rng.hpp"

namespace p2ad {

RocResult roc_auc(std::span<const double> scores, std::span<const int> labels) {
    if (scores.size() != labels.size()) throw ContractError("roc_auc: size mismatch");
    if (scores.empty()) throw ContractError("roc_auc: empty input");
    std::size_t pos = 0, neg = 0;
    for (int l : labels) {
        if (l == 1) ++pos;
        else if (l == 0) ++neg;
        else throw ContractError("roc_auc: labels must be 0 or 1");
    }
    if (pos == 0 || neg == 0)
        throw ContractError("roc_auc: both classes required");

    std::vector<std::size_t> idx(scores.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
        return scores[a] > scores[b];
    });

    RocResult r;
    r.points.push_back({0.0, 0.0});
    std::size_t tp = 0, fp = 0;
    double auc = 0.0;
    double prev_fpr = 0.0, prev_tpr = 0.0;
    std::size_t i = 0;
    while (i < idx.size()) {
        // One step per distinct score; ties move diagonally in one step,
        // which is what gives tied pairs half credit.
        const double s = scores[idx[i]];
        while (i < idx.size() && scores[idx[i]] == s) {
            if (labels[idx[i]] == 1) ++tp;
            else ++fp;
            ++i;
        }
        const double fpr = static_cast<double>(fp) / static_cast<double>(neg);
        const double tpr = static_cast<double>(tp) / static_cast<double>(pos);
        auc += (fpr - prev_fpr) * (tpr + prev_tpr) * 0.5;
        r.points.push_back({fpr, tpr});
        prev_fpr = fpr;
        prev_tpr = tpr;
    }
    r.auc = auc;
    return r;
}

std::string to_string(NetworkKind kind) {
    return kind == NetworkKind::regular ? "regular" : "pow2";
}

ThresholdSpec SweepThresholds::to_spec() const {
    ThresholdSpec spec;
    if (mode == DenoiseMode::none) return spec;
    if (theta1) spec.layers.push_back({0, mode, *theta1});
    if (theta2) spec.layers.push_back({1, mode, *theta2});
    spec.validate();
    return spec;
}

EvalReport sweep(const Model& regular, const Model& pow2,
                 std::span<const LabeledFrame> test_set,
                 const SweepOptions& options) {
    if (test_set.empty()) throw ContractError("sweep: empty test set");
    if (options.configs.empty()) throw ContractError("sweep: no configs");
    for (int lvl : options.noise_levels)
        if (lvl < 0) throw ContractError("sweep: negative noise level");

    // Ascending unique levels for prefix-nested noise generation.
    std::vector<int> gen_levels = options.noise_levels;
    std::sort(gen_levels.begin(), gen_levels.end());
    gen_levels.erase(std::unique(gen_levels.begin(), gen_levels.end()),
                     gen_levels.end());

    const std::size_t n_frames = test_set.size();
    const std::size_t n_cfg = options.configs.size();
    const std::size_t n_lvl = gen_levels.size();

    struct CellAccum {
        std::vector<double> scores;       // per frame
        std::vector<double> attributable; // savings fraction minus baseline
    };
    // cell index = ((net * n_cfg) + cfg) * n_lvl + lvl
    std::vector<CellAccum> cells(2 * n_cfg * n_lvl);
    for (auto& c : cells) {
        c.scores.resize(n_frames);
        c.attributable.resize(n_frames);
    }

    std::vector<ThresholdSpec> specs(n_cfg);
    for (std::size_t ci = 0; ci < n_cfg; ++ci)
        specs[ci] = options.configs[ci].to_spec();
    const ThresholdSpec no_denoise;

    parallel_for(n_frames, [&](std::size_t fi) {
        Rng rng(mix_seed(options.seed, static_cast<std::uint64_t>(fi)));
        Image noisy = test_set[fi].image;
        int blobs_so_far = 0;
        for (std::size_t li = 0; li < n_lvl; ++li) {
            const int level = gen_levels[li];
            noisy = add_noise_blobs(noisy, level - blobs_so_far, options.noise, rng);
            blobs_so_far = level;

            for (int net = 0; net < 2; ++net) {
                const Model& model = net == 0 ? regular : pow2;
                const auto run = [&](const ThresholdSpec& th) {
                    return net == 0 ? infer_real(model, noisy, &th)
                                    : infer(model, noisy, &th);
                };
                const InferenceResult base = run(no_denoise);
                const double base_savings = base.counter.savings_fraction();
                for (std::size_t ci = 0; ci < n_cfg; ++ci) {
                    const std::size_t cell =
                        (static_cast<std::size_t>(net) * n_cfg + ci) * n_lvl + li;
                    if (options.configs[ci].mode == DenoiseMode::none) {
                        cells[cell].scores[fi] = base.score;
                        cells[cell].attributable[fi] = 0.0;
                        continue;
                    }
                    const InferenceResult res = run(specs[ci]);
                    cells[cell].scores[fi] = res.score;
                    cells[cell].attributable[fi] =
                        res.counter.savings_fraction() - base_savings;
                }
            }
        }
    });

    std::vector<int> labels(n_frames);
    for (std::size_t i = 0; i < n_frames; ++i) labels[i] = test_set[i].label;

    EvalReport report;
    for (int net = 0; net < 2; ++net) {
        for (std::size_t ci = 0; ci < n_cfg; ++ci) {
            for (int level : options.noise_levels) {
                const std::size_t li = static_cast<std::size_t>(
                    std::lower_bound(gen_levels.begin(), gen_levels.end(), level) -
                    gen_levels.begin());
                const auto& cell =
                    cells[(static_cast<std::size_t>(net) * n_cfg + ci) * n_lvl + li];
                EvalRow row;
                row.network = net == 0 ? NetworkKind::regular : NetworkKind::pow2;
                row.config = options.configs[ci];
                row.noise_blobs = level;
                const RocResult roc = roc_auc(cell.scores, labels);
                row.auc = roc.auc;
                row.roc = roc.points;
                double mean = 0.0;
                for (double a : cell.attributable) mean += a;
                row.savings_pct = 100.0 * mean / static_cast<double>(n_frames);
                report.rows.push_back(std::move(row));
            }
        }
    }
    return report;
}

namespace {

std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

}  // namespace

void emit_csv(const EvalReport& report, const std::string& path) {
    std::string body = "network,mode,theta1,theta2,noise_blobs,auc,savings_pct\n";
    for (const auto& row : report.rows) {
        body += to_string(row.network);
        body += ',';
        body += to_string(row.config.mode);
        body += ',';
        if (row.config.theta1) body += fmt_double(*row.config.theta1);
        body += ',';
        if (row.config.theta2) body += fmt_double(*row.config.theta2);
        body += ',';
        body += std::to_string(row.noise_blobs);
        body += ',';
        body += fmt_double(row.auc);
        body += ',';
        body += fmt_double(row.savings_pct);
        body += '\n';
    }
    atomic_write_file(path, body);
}

EvalReport parse_report_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw FileError("cannot open " + path);
    std::string line;
    if (!std::getline(in, line) ||
        line != "network,mode,theta1,theta2,noise_blobs,auc,savings_pct")
        throw FormatError(FormatError::Kind::corrupt, path + ": bad report header");
    EvalReport report;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto f = split_csv_line(line);
        if (f.size() != 7)
            throw FormatError(FormatError::Kind::corrupt, path + ": bad field count");
        EvalRow row;
        if (f[0] == "regular") row.network = NetworkKind::regular;
        else if (f[0] == "pow2") row.network = NetworkKind::pow2;
        else throw FormatError(FormatError::Kind::corrupt, path + ": bad network");
        row.config.mode = denoise_mode_from_string(f[1]);
        if (!f[2].empty()) row.config.theta1 = std::strtod(f[2].c_str(), nullptr);
        if (!f[3].empty()) row.config.theta2 = std::strtod(f[3].c_str(), nullptr);
        row.noise_blobs = std::atoi(f[4].c_str());
        row.auc = std::strtod(f[5].c_str(), nullptr);
        row.savings_pct = std::strtod(f[6].c_str(), nullptr);
        report.rows.push_back(row);
    }
    return report;
}

void emit_roc_points(const EvalReport& report, const std::string& dir) {
    std::filesystem::create_directories(dir);
    for (const auto& row : report.rows) {
        std::ostringstream name;
        name << "roc_" << to_string(row.network) << "_" << to_string(row.config.mode);
        if (row.config.theta1) name << "_" << *row.config.theta1;
        if (row.config.theta2) name << "_" << *row.config.theta2;
        name << "_n" << row.noise_blobs << ".csv";
        std::string body = "fpr,tpr\n";
        for (const auto& p : row.roc)
            body += fmt_double(p.fpr) + "," + fmt_double(p.tpr) + "\n";
        atomic_write_file((std::filesystem::path(dir) / name.str()).string(), body);
    }
}

}  // namespace p2ad

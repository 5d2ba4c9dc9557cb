// End-to-end tests that drive the installed binary via popen, checking
// exit codes, emitted files, and stdout contracts.
#include <doctest.h>

#include <sys/wait.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include "p2ad/flow.hpp"
#include "p2ad/image.hpp"
#include "p2ad/rng.hpp"

using namespace p2ad;

namespace {

struct CliResult {
    int exit_code = -1;
    std::string output;  // stdout + stderr
};

CliResult run_cli(const std::string& args) {
    const std::string cmd = std::string(P2AD_CLI_PATH) + " " + args + " 2>&1";
    FILE* pipe = popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    CliResult r;
    char buf[512];
    while (std::fgets(buf, sizeof(buf), pipe)) r.output += buf;
    const int status = pclose(pipe);
    if (WIFEXITED(status)) r.exit_code = WEXITSTATUS(status);
    return r;
}

std::filesystem::path fresh_dir(const std::string& name) {
    const auto dir = std::filesystem::temp_directory_path() / "p2ad_cli" / name;
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

std::string slurp(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::string extract_hash(const std::string& output) {
    const auto pos = output.find("hash ");
    REQUIRE(pos != std::string::npos);
    return output.substr(pos + 5, 16);
}

// Small frames keep the full pipeline fast enough for a unit run.
std::filesystem::path small_config(const std::filesystem::path& dir) {
    const auto path = dir / "gen.cfg";
    std::ofstream(path) << "image_size = 16\n";
    return path;
}

}  // namespace

TEST_CASE("usage errors exit 1") {
    CHECK(run_cli("").exit_code == 1);                  // missing subcommand
    CHECK(run_cli("frobnicate").exit_code == 1);        // unknown subcommand
    CHECK(run_cli("gen-data").exit_code == 1);          // missing --out
    CHECK(run_cli("gen-data --out x --bogus").exit_code == 1);
    CHECK(run_cli("--help").exit_code == 0);
    CHECK(run_cli("train --help").exit_code == 0);
}

TEST_CASE("gen-data writes a reproducible dataset") {
    const auto base = fresh_dir("gen");
    const auto cfg = small_config(base);
    const auto d1 = base / "d1";
    const auto d2 = base / "d2";
    const auto d3 = base / "d3";

    const std::string common =
        " --normal 8 --anomalous 4 --config " + cfg.string();
    const CliResult r1 =
        run_cli("gen-data --out " + d1.string() + common + " --seed 3");
    REQUIRE(r1.exit_code == 0);
    CHECK(std::filesystem::exists(d1 / "train.txt"));
    CHECK(std::filesystem::exists(d1 / "test.txt"));
    CHECK(std::filesystem::exists(d1 / "manifest.json"));
    CHECK(std::filesystem::exists(d1 / "frames" / "frame_000000.flo"));

    const CliResult r2 =
        run_cli("gen-data --out " + d2.string() + common + " --seed 3");
    REQUIRE(r2.exit_code == 0);
    CHECK(extract_hash(r1.output) == extract_hash(r2.output));
    CHECK(slurp(d1 / "train.txt") == slurp(d2 / "train.txt"));
    CHECK(slurp(d1 / "frames" / "frame_000003.flo") ==
          slurp(d2 / "frames" / "frame_000003.flo"));

    const CliResult r3 =
        run_cli("gen-data --out " + d3.string() + common + " --seed 4");
    REQUIRE(r3.exit_code == 0);
    CHECK(extract_hash(r3.output) != extract_hash(r1.output));

    // Unknown config keys fail loudly as a usage error.
    const auto bad_cfg = base / "bad.cfg";
    std::ofstream(bad_cfg) << "image_size = 16\nimage_sise = 8\n";
    const CliResult rbad = run_cli("gen-data --out " + (base / "d4").string() +
                                   " --config " + bad_cfg.string());
    CHECK(rbad.exit_code == 1);
    CHECK(rbad.output.find("image_sise") != std::string::npos);
}

TEST_CASE("train, eval, and bench run end to end") {
    const auto base = fresh_dir("pipeline");
    const auto cfg = small_config(base);
    const auto data = base / "data";
    REQUIRE(run_cli("gen-data --out " + data.string() + " --normal 8 --anomalous 4 --seed 5 --config " +
                    cfg.string())
                .exit_code == 0);

    const auto train_cfg = base / "train.cfg";
    std::ofstream(train_cfg) << "input_size = 16\n"
                                "epochs_max = 1\n"
                                "loss_stop = 0.000000001\n";
    const auto model = base / "model.p2ad";
    // --epochs must win over the config's epochs_max.
    const CliResult tr = run_cli(
        "train --data " + data.string() + " --out " + model.string() +
        " --config " + train_cfg.string() +
        " --epochs 2 --batch-size 8 --lr 0.01 --seed 1");
    REQUIRE(tr.exit_code == 0);
    CHECK(tr.output.find("trained 2 epochs") != std::string::npos);
    CHECK(std::filesystem::exists(model));
    CHECK(std::filesystem::exists(model.string() + ".manifest.json"));

    const auto report = base / "report.csv";
    const CliResult ev = run_cli(
        "eval --data " + data.string() + " --model " + model.string() +
        " --out " + report.string() +
        " --noise-levels 0,2 --grid \"none;soft:0.05:0.05\" --seed 9");
    REQUIRE(ev.exit_code == 0);
    CHECK(ev.output.find("wrote 4 rows") != std::string::npos);
    CHECK(std::filesystem::exists(report.string() + ".manifest.json"));
    {
        std::ifstream in(report);
        std::string line;
        std::getline(in, line);
        CHECK(line == "network,mode,theta1,theta2,noise_blobs,auc,savings_pct");
        int rows = 0;
        while (std::getline(in, line)) {
            if (!line.empty()) ++rows;
            CHECK(line.rfind("pow2,", 0) == 0);  // no regular model given
        }
        CHECK(rows == 4);
    }

    const CliResult be =
        run_cli("bench --data " + data.string() + " --model " + model.string());
    REQUIRE(be.exit_code == 0);
    const auto field = [&](const std::string& key) {
        const auto pos = be.output.find(key + ": ");
        REQUIRE(pos != std::string::npos);
        return std::stoull(be.output.substr(pos + key.size() + 2));
    };
    CHECK(field("shift_adds_done") + field("accumulates_skipped") ==
          field("dense_total"));
    CHECK(be.output.find("layer_1_savings_pct:") != std::string::npos);
}

TEST_CASE("data errors exit 2") {
    const auto base = fresh_dir("errs");
    CHECK(run_cli("train --data " + (base / "missing").string() + " --out " +
                  (base / "m.p2ad").string())
              .exit_code == 2);

    const auto junk = base / "junk.p2ad";
    std::ofstream(junk, std::ios::binary) << "XXXXJUNKJUNKJUNK";
    CHECK(run_cli("bench --data " + (base / "missing").string() + " --model " +
                  junk.string())
              .exit_code == 2);
    CHECK(run_cli("flow --frame-a " + (base / "a.pgm").string() +
                  " --frame-b " + (base / "b.pgm").string())
              .exit_code == 2);
}

TEST_CASE("flow subcommand reports magnitudes") {
    const auto base = fresh_dir("flow");
    Rng rng(12);
    Image frame(32, 32);
    for (auto& p : frame.pixels) p = rng.uniform(0.0, 1.0);
    frame = box_blur(frame, 2);
    const auto a = base / "a.pgm";
    write_pgm(frame, a.string());

    // Identical frames: exactly zero motion.
    const CliResult same = run_cli("flow --frame-a " + a.string() +
                                   " --frame-b " + a.string() + " --out-flo " +
                                   (base / "zero.flo").string());
    REQUIRE(same.exit_code == 0);
    CHECK(same.output.find("max_magnitude: 0.000000000") != std::string::npos);
    const FlowField zero = read_flo((base / "zero.flo").string());
    CHECK(zero.width == 32);
    CHECK(std::filesystem::exists(base / "zero.flo.manifest.json"));

    // Inspecting an existing field bypasses estimation.
    FlowField f(4, 2);
    f.u.assign(f.u.size(), 3.0f);
    f.v.assign(f.v.size(), 4.0f);
    const auto flo = base / "field.flo";
    write_flo(f, flo.string());
    const CliResult inspect = run_cli("flow --flo " + flo.string());
    REQUIRE(inspect.exit_code == 0);
    CHECK(inspect.output.find("max_magnitude: 5.000000000") != std::string::npos);
    CHECK(inspect.output.find("mean_magnitude: 5.000000000") != std::string::npos);

    CHECK(run_cli("flow --flo " + flo.string() + " --frame-a " + a.string())
              .exit_code == 1);
    CHECK(run_cli("flow").exit_code == 1);

    // PGM magnitude output is written and normalized.
    const auto pgm_out = base / "mag.pgm";
    REQUIRE(run_cli("flow --flo " + flo.string() + " --out " + pgm_out.string())
                .exit_code == 0);
    const Image mag = read_pgm(pgm_out.string());
    CHECK(mag.width == 4);
    CHECK(mag.max_value() == doctest::Approx(1.0).epsilon(0.01));
}

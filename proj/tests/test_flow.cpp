#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <vector>

#include "p2ad/errors.hpp"
#include "p2ad/flow.hpp"
#include "p2ad/rng.hpp"

using namespace p2ad;

namespace {

std::filesystem::path temp_dir() {
    const auto dir = std::filesystem::temp_directory_path() / "p2ad_flow_tests";
    std::filesystem::create_directories(dir);
    return dir;
}

// Smooth random texture: blurred uniform noise with side-length features
// a quadratic window fit can track.
Image smooth_texture(int width, int height, std::uint64_t seed) {
    Rng rng(seed);
    Image img(width, height);
    for (auto& p : img.pixels) p = rng.uniform(0.0, 1.0);
    return box_blur(box_blur(img, 3), 2);
}

}  // namespace

TEST_CASE("zero motion gives exactly zero flow") {
    const Image frame = smooth_texture(48, 48, 7);
    const FlowField flow = farneback_flow(frame, frame);
    double peak = 0.0;
    for (const double m : flow.magnitude().pixels) peak = std::max(peak, m);
    CHECK(peak <= 1e-6);
}

TEST_CASE("two-pixel horizontal translation is recovered") {
    // Both frames crop the same wide texture, offset by 2 columns, so no
    // border content is invented.
    const int w = 64, h = 64, margin = 16;
    const Image tex = smooth_texture(w + 8, h, 99);
    Image a(w, h), b(w, h);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            a.at(x, y) = tex.at(x + 4, y);      // frame_a = T(x)
            b.at(x, y) = tex.at(x + 2, y);      // frame_b = T(x - 2)
        }
    }
    const FlowField flow = farneback_flow(a, b, 15, 3);
    std::vector<double> u_interior, v_interior;
    for (int y = margin; y < h - margin; ++y) {
        for (int x = margin; x < w - margin; ++x) {
            u_interior.push_back(flow.u[static_cast<std::size_t>(y) * w + x]);
            v_interior.push_back(flow.v[static_cast<std::size_t>(y) * w + x]);
        }
    }
    std::sort(u_interior.begin(), u_interior.end());
    std::sort(v_interior.begin(), v_interior.end());
    const double median_u = u_interior[u_interior.size() / 2];
    const double median_v = v_interior[v_interior.size() / 2];
    CHECK(std::fabs(median_u - 2.0) <= 0.5);
    CHECK(std::fabs(median_v) <= 0.5);
}

TEST_CASE("flow parameter validation") {
    const Image a(8, 8), b(8, 8), c(9, 8);
    CHECK_THROWS_AS(farneback_flow(a, c), ContractError);
    CHECK_THROWS_AS(farneback_flow(a, b, 4, 3), ContractError);
    CHECK_THROWS_AS(farneback_flow(a, b, 1, 3), ContractError);
    CHECK_THROWS_AS(farneback_flow(a, b, 15, 0), ContractError);
}

TEST_CASE("flo round trip is bit exact") {
    Rng rng(55);
    const auto path = (temp_dir() / "roundtrip.flo").string();
    for (int trial = 0; trial < 20; ++trial) {
        FlowField f(rng.uniform_int(1, 20), rng.uniform_int(1, 20));
        for (auto& u : f.u) u = static_cast<float>(rng.uniform(-100.0, 100.0));
        for (auto& v : f.v) v = static_cast<float>(rng.uniform(-100.0, 100.0));
        write_flo(f, path);
        const FlowField back = read_flo(path);
        REQUIRE(back.width == f.width);
        REQUIRE(back.height == f.height);
        CHECK(back.u == f.u);  // float equality: bit-exact round trip
        CHECK(back.v == f.v);
    }
}

TEST_CASE("flo on-disk layout matches the published format") {
    // 2x1 field: 4 magic + 8 dims + 2*2*4 payload = 28 bytes.
    FlowField f(2, 1);
    f.u = {1.0f, 3.0f};
    f.v = {2.0f, 4.0f};
    const auto path = (temp_dir() / "layout.flo").string();
    write_flo(f, path);
    std::ifstream in(path, std::ios::binary);
    std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                     std::istreambuf_iterator<char>());
    REQUIRE(bytes.size() == 28);
    CHECK(bytes[0] == 0x50);  // 'P'
    CHECK(bytes[1] == 0x49);  // 'I'
    CHECK(bytes[2] == 0x45);  // 'E'
    CHECK(bytes[3] == 0x48);  // 'H'
    CHECK(bytes[4] == 2);     // width LE
    CHECK(bytes[8] == 1);     // height LE
    // 1.0f = 0x3F800000 little-endian: 00 00 80 3F.
    CHECK(bytes[12] == 0x00);
    CHECK(bytes[13] == 0x00);
    CHECK(bytes[14] == 0x80);
    CHECK(bytes[15] == 0x3F);
    // interleaved u,v: next float is v[0] = 2.0f = 0x40000000.
    CHECK(bytes[19] == 0x40);
}

TEST_CASE("flo error kinds are distinct") {
    const auto dir = temp_dir();

    const auto bad_magic = (dir / "bad_magic.flo").string();
    {
        std::ofstream out(bad_magic, std::ios::binary);
        out.write("HEIP\x02\x00\x00\x00\x01\x00\x00\x00", 12);
    }
    try {
        read_flo(bad_magic);
        FAIL("expected FormatError");
    } catch (const FormatError& e) {
        CHECK(e.kind() == FormatError::Kind::bad_magic);
    }

    const auto truncated = (dir / "truncated.flo").string();
    {
        FlowField f(4, 4);
        write_flo(f, truncated);
        std::filesystem::resize_file(truncated, 40);  // cut the payload short
    }
    try {
        read_flo(truncated);
        FAIL("expected FormatError");
    } catch (const FormatError& e) {
        CHECK(e.kind() == FormatError::Kind::truncated);
    }

    const auto corrupt = (dir / "corrupt.flo").string();
    {
        std::ofstream out(corrupt, std::ios::binary);
        const std::int32_t w = -3, h = 1;
        out.write("PIEH", 4);
        out.write(reinterpret_cast<const char*>(&w), 4);
        out.write(reinterpret_cast<const char*>(&h), 4);
    }
    try {
        read_flo(corrupt);
        FAIL("expected FormatError");
    } catch (const FormatError& e) {
        CHECK(e.kind() == FormatError::Kind::corrupt);
    }

    CHECK_THROWS_AS(read_flo((dir / "missing.flo").string()), FileError);
}

TEST_CASE("magnitude combines both components") {
    FlowField f(2, 1);
    f.u = {3.0f, 0.0f};
    f.v = {4.0f, 0.0f};
    const Image mag = f.magnitude();
    CHECK(mag.pixels[0] == doctest::Approx(5.0));
    CHECK(mag.pixels[1] == 0.0);
}

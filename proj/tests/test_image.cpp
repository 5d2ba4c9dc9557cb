#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "p2ad/errors.hpp"
#include "p2ad/image.hpp"

using namespace p2ad;

namespace {

std::filesystem::path temp_dir() {
    const auto dir = std::filesystem::temp_directory_path() / "p2ad_image_tests";
    std::filesystem::create_directories(dir);
    return dir;
}

}  // namespace

TEST_CASE("image construction and stats") {
    Image img(4, 3, 0.5);
    CHECK(img.pixels.size() == 12);
    CHECK(img.max_value() == 0.5);
    CHECK(img.mean_value() == 0.5);
    img.at(2, 1) = 2.0;
    CHECK(img.max_value() == 2.0);
    CHECK_THROWS_AS(Image(0, 3), ContractError);
}

TEST_CASE("box blur preserves the mean of a constant image") {
    Image img(8, 8, 0.25);
    const Image out = box_blur(img, 2);
    for (double p : out.pixels) CHECK(p == doctest::Approx(0.25).epsilon(1e-12));
}

TEST_CASE("box blur radius 0 is identity") {
    Image img(5, 5);
    img.at(2, 2) = 1.0;
    const Image out = box_blur(img, 0);
    CHECK(out.pixels == img.pixels);
    CHECK_THROWS_AS(box_blur(img, -1), ContractError);
}

TEST_CASE("box blur spreads an impulse within the window") {
    Image img(7, 7);
    img.at(3, 3) = 9.0;
    const Image out = box_blur(img, 1);
    // Full interior windows hold 9 taps, so the impulse becomes 1.0.
    CHECK(out.at(3, 3) == doctest::Approx(1.0));
    CHECK(out.at(2, 2) == doctest::Approx(1.0));
    CHECK(out.at(1, 1) == doctest::Approx(0.0));
    // Total mass is conserved for interior impulses.
    double total = 0.0;
    for (double p : out.pixels) total += p;
    CHECK(total == doctest::Approx(9.0).epsilon(1e-12));
}

TEST_CASE("pgm round trip at 8 bits") {
    const auto path = (temp_dir() / "roundtrip.pgm").string();
    Image img(6, 4);
    for (std::size_t i = 0; i < img.pixels.size(); ++i)
        img.pixels[i] = static_cast<double>(i) / 255.0;
    write_pgm(img, path);
    const Image back = read_pgm(path);
    REQUIRE(back.width == 6);
    REQUIRE(back.height == 4);
    for (std::size_t i = 0; i < img.pixels.size(); ++i)
        CHECK(back.pixels[i] == doctest::Approx(img.pixels[i]).epsilon(1e-9));
}

TEST_CASE("pgm reads 16-bit samples big-endian") {
    const auto path = (temp_dir() / "wide.pgm").string();
    {
        std::ofstream out(path, std::ios::binary);
        out << "P5\n2 1\n65535\n";
        // 0x8000 = 32768 and 0xFFFF = 65535.
        const unsigned char raster[] = {0x80, 0x00, 0xFF, 0xFF};
        out.write(reinterpret_cast<const char*>(raster), 4);
    }
    const Image img = read_pgm(path);
    CHECK(img.pixels[0] == doctest::Approx(32768.0 / 65535.0).epsilon(1e-12));
    CHECK(img.pixels[1] == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("pgm header comments are skipped") {
    const auto path = (temp_dir() / "comments.pgm").string();
    {
        std::ofstream out(path, std::ios::binary);
        out << "P5\n# a comment line\n3 # trailing\n1\n255\n";
        const unsigned char raster[] = {0, 128, 255};
        out.write(reinterpret_cast<const char*>(raster), 3);
    }
    const Image img = read_pgm(path);
    CHECK(img.width == 3);
    CHECK(img.height == 1);
    CHECK(img.pixels[2] == doctest::Approx(1.0));
}

TEST_CASE("pgm error paths") {
    const auto dir = temp_dir();
    CHECK_THROWS_AS(read_pgm((dir / "missing.pgm").string()), FileError);

    const auto bad_magic = (dir / "bad_magic.pgm").string();
    {
        std::ofstream out(bad_magic, std::ios::binary);
        out << "P6\n1 1\n255\n x";
    }
    CHECK_THROWS_AS(read_pgm(bad_magic), FormatError);

    const auto truncated = (dir / "short.pgm").string();
    {
        std::ofstream out(truncated, std::ios::binary);
        out << "P5\n4 4\n255\n";
        out.put(1);  // 1 byte instead of 16
    }
    try {
        read_pgm(truncated);
        FAIL("expected FormatError");
    } catch (const FormatError& e) {
        CHECK(e.kind() == FormatError::Kind::truncated);
    }
}

#pragma once

#include <string>
#include <vector>

namespace p2ad {

// Row-major grayscale image of doubles.
struct Image {
    int width = 0;
    int height = 0;
    std::vector<double> pixels;

    Image() = default;
    Image(int width, int height, double fill = 0.0);

    double& at(int x, int y) { return pixels[static_cast<std::size_t>(y) * width + x]; }
    double at(int x, int y) const { return pixels[static_cast<std::size_t>(y) * width + x]; }

    double max_value() const;
    double mean_value() const;
};

// Box blur with window (2*radius+1)^2; windows are clamped at the image
// border and normalized by the in-bounds tap count. radius 0 is identity.
Image box_blur(const Image& img, int radius);

// Binary PGM (P5). Reading accepts maxval up to 65535 (16-bit samples are
// big-endian per the format) and normalizes to [0, 1]. Writing emits
// 8-bit samples of the input clamped to [0, 1].
Image read_pgm(const std::string& path);
void write_pgm(const Image& img, const std::string& path);

}  // namespace p2ad

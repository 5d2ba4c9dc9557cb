#include "p2ad/image.hpp"

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <fstream>
#include <istream>
#include <vector>

#include "p2ad/errors.hpp"

namespace p2ad {

Image::Image(int width_in, int height_in, double fill) {
    if (width_in <= 0 || height_in <= 0)
        throw ContractError("image dimensions must be positive");
    width = width_in;
    height = height_in;
    pixels.assign(static_cast<std::size_t>(width) * height, fill);
}

double Image::max_value() const {
    double m = 0.0;
    for (double p : pixels) m = std::max(m, p);
    return m;
}

double Image::mean_value() const {
    if (pixels.empty()) return 0.0;
    double s = 0.0;
    for (double p : pixels) s += p;
    return s / static_cast<double>(pixels.size());
}

Image box_blur(const Image& img, int radius) {
    if (radius < 0) throw ContractError("box_blur: radius must be >= 0");
    if (radius == 0) return img;
    Image out(img.width, img.height);
    for (int y = 0; y < img.height; ++y) {
        const int y0 = std::max(0, y - radius);
        const int y1 = std::min(img.height - 1, y + radius);
        for (int x = 0; x < img.width; ++x) {
            const int x0 = std::max(0, x - radius);
            const int x1 = std::min(img.width - 1, x + radius);
            double s = 0.0;
            for (int yy = y0; yy <= y1; ++yy)
                for (int xx = x0; xx <= x1; ++xx) s += img.at(xx, yy);
            out.at(x, y) = s / static_cast<double>((y1 - y0 + 1) * (x1 - x0 + 1));
        }
    }
    return out;
}

namespace {

// Skips whitespace and '#' comment lines between header tokens.
int next_pgm_int(std::istream& in, const std::string& path) {
    int c = in.get();
    while (c != EOF) {
        if (c == '#') {
            while (c != EOF && c != '\n') c = in.get();
        } else if (std::isspace(c)) {
            c = in.get();
        } else {
            break;
        }
    }
    if (c == EOF || !std::isdigit(c))
        throw FormatError(FormatError::Kind::corrupt, path + ": bad PGM header");
    long v = 0;
    while (c != EOF && std::isdigit(c)) {
        v = v * 10 + (c - '0');
        if (v > 1 << 30)
            throw FormatError(FormatError::Kind::corrupt, path + ": PGM value overflow");
        c = in.get();
    }
    if (c != EOF) in.unget();
    return static_cast<int>(v);
}

}  // namespace

Image read_pgm(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FileError("cannot open " + path);
    char magic[2] = {0, 0};
    in.read(magic, 2);
    if (!in || magic[0] != 'P' || magic[1] != '5')
        throw FormatError(FormatError::Kind::bad_magic, path + ": not a P5 PGM");
    const int w = next_pgm_int(in, path);
    const int h = next_pgm_int(in, path);
    const int maxval = next_pgm_int(in, path);
    if (w <= 0 || h <= 0 || maxval <= 0 || maxval > 65535)
        throw FormatError(FormatError::Kind::corrupt, path + ": bad PGM dimensions");
    in.get();  // single whitespace byte before raster

    Image img(w, h);
    const std::size_t n = img.pixels.size();
    if (maxval < 256) {
        std::vector<unsigned char> raw(n);
        in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(n));
        if (static_cast<std::size_t>(in.gcount()) != n)
            throw FormatError(FormatError::Kind::truncated, path + ": short PGM raster");
        for (std::size_t i = 0; i < n; ++i)
            img.pixels[i] = raw[i] / static_cast<double>(maxval);
    } else {
        std::vector<unsigned char> raw(n * 2);
        in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(n * 2));
        if (static_cast<std::size_t>(in.gcount()) != n * 2)
            throw FormatError(FormatError::Kind::truncated, path + ": short PGM raster");
        for (std::size_t i = 0; i < n; ++i) {
            const int v = (raw[2 * i] << 8) | raw[2 * i + 1];  // big-endian sample
            img.pixels[i] = v / static_cast<double>(maxval);
        }
    }
    return img;
}

void write_pgm(const Image& img, const std::string& path) {
    if (img.width <= 0 || img.height <= 0)
        throw ContractError("write_pgm: empty image");
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw FileError("cannot write " + path);
    out << "P5\n" << img.width << " " << img.height << "\n255\n";
    std::vector<unsigned char> raw(img.pixels.size());
    for (std::size_t i = 0; i < img.pixels.size(); ++i) {
        const double v = std::clamp(img.pixels[i], 0.0, 1.0);
        raw[i] = static_cast<unsigned char>(v * 255.0 + 0.5);
    }
    out.write(reinterpret_cast<const char*>(raw.data()),
              static_cast<std::streamsize>(raw.size()));
    if (!out) throw FileError("write failed: " + path);
}

}  // namespace p2ad

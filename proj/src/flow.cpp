#include "p2ad/flow.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <vector>

#include "p2ad/errors.hpp"

namespace p2ad {

FlowField::FlowField(int width_in, int height_in) {
    if (width_in <= 0 || height_in <= 0)
        throw ContractError("flow field dimensions must be positive");
    width = width_in;
    height = height_in;
    u.assign(static_cast<std::size_t>(width) * height, 0.0f);
    v.assign(static_cast<std::size_t>(width) * height, 0.0f);
}

Image FlowField::magnitude() const {
    Image img(width, height);
    for (std::size_t i = 0; i < u.size(); ++i)
        img.pixels[i] = std::hypot(static_cast<double>(u[i]),
                                   static_cast<double>(v[i]));
    return img;
}

namespace {

// Quadratic expansion f(x,y) ~ c + bx*x + by*y + axx*x^2 + ayy*y^2 + axy*xy
// in window-local coordinates, weighted least squares with a Gaussian
// applicability. Border pixels clamp sample coordinates, so the Gram
// matrix of the basis is the same everywhere and its inverse reduces to a
// handful of scalars by the parity of the basis terms.
struct PolyCoeffs {
    std::vector<double> bx, by, axx, ayy, axy;
};

struct PolySolver {
    int radius;
    std::vector<double> weight;         // (2r+1)^2 Gaussian taps
    double inv_sx2, inv_sx2y2;          // bx/by and axy denominators
    double i10, i11, i12;               // rows 2..3 of the (c,axx,ayy) inverse

    explicit PolySolver(int window) {
        radius = window / 2;
        const double sigma = 0.5 * radius;
        const int win = 2 * radius + 1;
        weight.resize(static_cast<std::size_t>(win) * win);
        double s1 = 0, sx2 = 0, sx4 = 0, sx2y2 = 0;
        for (int dy = -radius; dy <= radius; ++dy) {
            for (int dx = -radius; dx <= radius; ++dx) {
                const double g =
                    std::exp(-(dx * dx + dy * dy) / (2.0 * sigma * sigma));
                weight[static_cast<std::size_t>(dy + radius) * win +
                       (dx + radius)] = g;
                s1 += g;
                sx2 += g * dx * dx;
                sx4 += g * dx * dx * dx * dx;
                sx2y2 += g * dx * dx * dy * dy;
            }
        }
        // det of [[s1,s2,s2],[s2,s4,s22],[s2,s22,s4]] factored by symmetry.
        const double det =
            (sx4 - sx2y2) * (s1 * (sx4 + sx2y2) - 2.0 * sx2 * sx2);
        inv_sx2 = 1.0 / sx2;
        inv_sx2y2 = 1.0 / sx2y2;
        i10 = -sx2 * (sx4 - sx2y2) / det;
        i11 = (s1 * sx4 - sx2 * sx2) / det;
        i12 = (sx2 * sx2 - s1 * sx2y2) / det;
    }

    PolyCoeffs expand(const Image& img) const {
        const int w = img.width, h = img.height, win = 2 * radius + 1;
        const std::size_t n = img.pixels.size();
        PolyCoeffs out;
        out.bx.resize(n);
        out.by.resize(n);
        out.axx.resize(n);
        out.ayy.resize(n);
        out.axy.resize(n);
        for (int y = 0; y < h; ++y) {
            for (int x = 0; x < w; ++x) {
                double p1 = 0, px = 0, py = 0, pxx = 0, pyy = 0, pxy = 0;
                for (int dy = -radius; dy <= radius; ++dy) {
                    const int sy = std::clamp(y + dy, 0, h - 1);
                    for (int dx = -radius; dx <= radius; ++dx) {
                        const int sx = std::clamp(x + dx, 0, w - 1);
                        const double wf =
                            weight[static_cast<std::size_t>(dy + radius) * win +
                                   (dx + radius)] *
                            img.at(sx, sy);
                        p1 += wf;
                        px += wf * dx;
                        py += wf * dy;
                        pxx += wf * dx * dx;
                        pyy += wf * dy * dy;
                        pxy += wf * dx * dy;
                    }
                }
                const std::size_t i = static_cast<std::size_t>(y) * w + x;
                out.bx[i] = px * inv_sx2;
                out.by[i] = py * inv_sx2;
                out.axy[i] = pxy * inv_sx2y2;
                out.axx[i] = i10 * p1 + i11 * pxx + i12 * pyy;
                out.ayy[i] = i10 * p1 + i12 * pxx + i11 * pyy;
            }
        }
        return out;
    }
};

}  // namespace

FlowField farneback_flow(const Image& frame_a, const Image& frame_b,
                         int window, int iterations) {
    if (frame_a.width != frame_b.width || frame_a.height != frame_b.height)
        throw ContractError("farneback_flow: frame size mismatch");
    if (window < 3 || window % 2 == 0)
        throw ContractError("farneback_flow: window must be odd and >= 3");
    if (iterations < 1)
        throw ContractError("farneback_flow: iterations must be >= 1");

    const int w = frame_a.width, h = frame_a.height;
    const PolySolver solver(window);
    const PolyCoeffs pa = solver.expand(frame_a);
    const PolyCoeffs pb = solver.expand(frame_b);

    FlowField flow(w, h);
    const std::size_t n = flow.u.size();

    // Per-pixel normal equations of the constraint A d = db, averaged over
    // the window so neighboring constraints support each other.
    Image g11(w, h), g12(w, h), g22(w, h), h1(w, h), h2(w, h);

    for (int iter = 0; iter < iterations; ++iter) {
        for (int y = 0; y < h; ++y) {
            for (int x = 0; x < w; ++x) {
                const std::size_t i = static_cast<std::size_t>(y) * w + x;
                const double du = flow.u[i], dv = flow.v[i];
                const int x2 = std::clamp(
                    static_cast<int>(std::lround(x + du)), 0, w - 1);
                const int y2 = std::clamp(
                    static_cast<int>(std::lround(y + dv)), 0, h - 1);
                const std::size_t j = static_cast<std::size_t>(y2) * w + x2;

                // Symmetric 2x2 A = avg of both frames' quadratic parts.
                const double a11 = 0.5 * (pa.axx[i] + pb.axx[j]);
                const double a22 = 0.5 * (pa.ayy[i] + pb.ayy[j]);
                const double a12 = 0.25 * (pa.axy[i] + pb.axy[j]);
                // db = -(b2 - b1)/2 compensated for the displacement the
                // second frame was sampled at.
                const double db1 =
                    -0.5 * (pb.bx[j] - pa.bx[i]) + a11 * du + a12 * dv;
                const double db2 =
                    -0.5 * (pb.by[j] - pa.by[i]) + a12 * du + a22 * dv;

                g11.pixels[i] = a11 * a11 + a12 * a12;
                g12.pixels[i] = a12 * (a11 + a22);
                g22.pixels[i] = a12 * a12 + a22 * a22;
                h1.pixels[i] = a11 * db1 + a12 * db2;
                h2.pixels[i] = a12 * db1 + a22 * db2;
            }
        }

        const int avg_radius = window / 2;
        const Image bg11 = box_blur(g11, avg_radius);
        const Image bg12 = box_blur(g12, avg_radius);
        const Image bg22 = box_blur(g22, avg_radius);
        const Image bh1 = box_blur(h1, avg_radius);
        const Image bh2 = box_blur(h2, avg_radius);

        for (std::size_t i = 0; i < n; ++i) {
            const double t11 = bg11.pixels[i], t12 = bg12.pixels[i],
                         t22 = bg22.pixels[i];
            // Tiny ridge keeps textureless patches at zero instead of NaN.
            const double lambda = 1e-12 + 1e-6 * (t11 + t22);
            const double det = (t11 + lambda) * (t22 + lambda) - t12 * t12;
            flow.u[i] = static_cast<float>(
                ((t22 + lambda) * bh1.pixels[i] - t12 * bh2.pixels[i]) / det);
            flow.v[i] = static_cast<float>(
                ((t11 + lambda) * bh2.pixels[i] - t12 * bh1.pixels[i]) / det);
        }
    }
    return flow;
}

FlowField read_flo(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FileError("cannot open " + path);
    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, "PIEH", 4) != 0)
        throw FormatError(FormatError::Kind::bad_magic, path + ": not a .flo file");
    std::int32_t w = 0, h = 0;
    in.read(reinterpret_cast<char*>(&w), 4);
    in.read(reinterpret_cast<char*>(&h), 4);
    if (!in || w <= 0 || h <= 0 || w > 1 << 16 || h > 1 << 16)
        throw FormatError(FormatError::Kind::corrupt, path + ": bad .flo dimensions");
    FlowField f(w, h);
    std::vector<float> inter(static_cast<std::size_t>(w) * h * 2);
    in.read(reinterpret_cast<char*>(inter.data()),
            static_cast<std::streamsize>(inter.size() * sizeof(float)));
    if (static_cast<std::size_t>(in.gcount()) != inter.size() * sizeof(float))
        throw FormatError(FormatError::Kind::truncated, path + ": short .flo payload");
    for (std::size_t i = 0; i < f.u.size(); ++i) {
        f.u[i] = inter[2 * i];
        f.v[i] = inter[2 * i + 1];
    }
    return f;
}

void write_flo(const FlowField& field, const std::string& path) {
    if (field.width <= 0 || field.height <= 0)
        throw ContractError("write_flo: empty field");
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw FileError("cannot write " + path);
    out.write("PIEH", 4);
    const std::int32_t w = field.width, h = field.height;
    out.write(reinterpret_cast<const char*>(&w), 4);
    out.write(reinterpret_cast<const char*>(&h), 4);
    std::vector<float> inter(field.u.size() * 2);
    for (std::size_t i = 0; i < field.u.size(); ++i) {
        inter[2 * i] = field.u[i];
        inter[2 * i + 1] = field.v[i];
    }
    out.write(reinterpret_cast<const char*>(inter.data()),
              static_cast<std::streamsize>(inter.size() * sizeof(float)));
    if (!out) throw FileError("write failed: " + path);
}

}  // namespace p2ad

#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <fstream>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "faultloc/relaydsp.hpp"

namespace faultloc {

inline constexpr int kRasterHeight = 339;  // rows, X axis (up = larger X)
inline constexpr int kRasterWidth = 292;   // columns, R axis

/// Fixed R-X window shared by every image of a dataset so that pixel position
/// encodes absolute impedance.
struct Viewport {
    double r_min = -50.0;
    double r_max = 150.0;
    double x_min = -50.0;
    double x_max = 150.0;

    void validate() const {
        if (!(r_min < r_max) || !(x_min < x_max))
            throw std::invalid_argument("viewport: min must be < max");
    }
};

struct RasterImage {
    int height = kRasterHeight;
    int width = kRasterWidth;
    std::vector<std::uint8_t> pixels;  // row-major

    std::uint8_t at(int row, int col) const { return pixels[static_cast<std::size_t>(row) * width + col]; }
};

struct NormalizedImage {
    int height = 0;
    int width = 0;
    std::vector<double> pixels;  // row-major, in [0,1]

    double at(int row, int col) const { return pixels[static_cast<std::size_t>(row) * width + col]; }
};

struct RasterOptions {
    int intensity_step = 16;        // added per visit, saturating at 255
    bool zone_overlay = false;      // optional mho characteristic
    double zone_reach_ohm = 0.0;    // |Z| of the mho reach point
    double zone_angle_rad = 0.0;    // angle of the reach point
};

namespace detail {

struct PixelPoint {
    int row;
    int col;
};

inline PixelPoint to_pixel(double r, double x, const Viewport& vp) {
    const double fc = (r - vp.r_min) / (vp.r_max - vp.r_min) * (kRasterWidth - 1);
    const double fr = (vp.x_max - x) / (vp.x_max - vp.x_min) * (kRasterHeight - 1);
    return {static_cast<int>(std::lround(fr)), static_cast<int>(std::lround(fc))};
}

/// Liang-Barsky clip of the segment (r0,x0)-(r1,x1) against the viewport.
/// Returns false when nothing remains.
inline bool clip_segment(const Viewport& vp, double& r0, double& x0, double& r1, double& x1) {
    double t0 = 0.0, t1 = 1.0;
    const double dr = r1 - r0;
    const double dx = x1 - x0;
    const double p[4] = {-dr, dr, -dx, dx};
    const double q[4] = {r0 - vp.r_min, vp.r_max - r0, x0 - vp.x_min, vp.x_max - x0};
    for (int i = 0; i < 4; ++i) {
        if (p[i] == 0.0) {
            if (q[i] < 0.0) return false;  // parallel and outside
        } else {
            const double t = q[i] / p[i];
            if (p[i] < 0.0) {
                if (t > t1) return false;
                t0 = std::max(t0, t);
            } else {
                if (t < t0) return false;
                t1 = std::min(t1, t);
            }
        }
    }
    const double nr0 = r0 + t0 * dr, nx0 = x0 + t0 * dx;
    const double nr1 = r0 + t1 * dr, nx1 = x0 + t1 * dx;
    r0 = nr0;
    x0 = nx0;
    r1 = nr1;
    x1 = nx1;
    return true;
}

inline void visit(RasterImage& img, PixelPoint p, int step) {
    auto& px = img.pixels[static_cast<std::size_t>(p.row) * img.width + p.col];
    px = static_cast<std::uint8_t>(std::min(255, static_cast<int>(px) + step));
}

/// Bresenham walk from a to b inclusive; skips `a` itself when skip_first is
/// set (it was already visited as the previous segment's endpoint).
inline void draw_segment(RasterImage& img, PixelPoint a, PixelPoint b, int step, bool skip_first) {
    const int d_col = std::abs(b.col - a.col);
    const int d_row = std::abs(b.row - a.row);
    const int s_col = a.col < b.col ? 1 : -1;
    const int s_row = a.row < b.row ? 1 : -1;
    int err = d_col - d_row;
    PixelPoint p = a;
    bool first = true;
    while (true) {
        if (!(first && skip_first)) visit(img, p, step);
        first = false;
        if (p.col == b.col && p.row == b.row) break;
        const int e2 = 2 * err;
        if (e2 > -d_row) {
            err -= d_row;
            p.col += s_col;
        }
        if (e2 < d_col) {
            err += d_col;
            p.row += s_row;
        }
    }
    // a stationary point still counts as one visit per locus sample
    if (skip_first && a.row == b.row && a.col == b.col) visit(img, b, step);
}

}  // namespace detail

/// Polyline rendering of the locus into the fixed 339x292 grid. Deterministic:
/// integer line walking over clipped segments, intensity accumulating per
/// visit and saturating at 255. Points outside the viewport are clipped away.
inline RasterImage rasterize(const ImpedanceLocus& locus, const Viewport& vp,
                             const RasterOptions& opts = {}) {
    vp.validate();
    if (locus.points.empty()) throw std::invalid_argument("rasterize: empty locus");

    RasterImage img;
    img.pixels.assign(static_cast<std::size_t>(kRasterHeight) * kRasterWidth, 0);

    if (opts.zone_overlay && opts.zone_reach_ohm > 0.0) {
        // mho circle through the origin with the reach point on its diameter
        const std::complex<double> center =
            std::polar(opts.zone_reach_ohm / 2.0, opts.zone_angle_rad);
        const double radius = opts.zone_reach_ohm / 2.0;
        const int segments = 1024;
        double pr = center.real() + radius, px = center.imag();
        bool prev_ok = false;
        detail::PixelPoint prev_px{0, 0};
        for (int i = 1; i <= segments; ++i) {
            const double ang = 2.0 * std::numbers::pi * i / segments;
            const double cr = center.real() + radius * std::cos(ang);
            const double cx = center.imag() + radius * std::sin(ang);
            double r0 = pr, x0 = px, r1 = cr, x1 = cx;
            if (detail::clip_segment(vp, r0, x0, r1, x1)) {
                const auto a = detail::to_pixel(r0, x0, vp);
                const auto b = detail::to_pixel(r1, x1, vp);
                const bool skip = prev_ok && a.row == prev_px.row && a.col == prev_px.col;
                detail::draw_segment(img, a, b, opts.intensity_step, skip);
                prev_px = b;
                prev_ok = true;
            } else {
                prev_ok = false;
            }
            pr = cr;
            px = cx;
        }
    }

    bool prev_drawn = false;
    detail::PixelPoint prev_pixel{0, 0};
    for (std::size_t i = 0; i < locus.points.size(); ++i) {
        const auto& pt = locus.points[i];
        if (i == 0) {
            double r0 = pt.r, x0 = pt.x, r1 = pt.r, x1 = pt.x;
            if (detail::clip_segment(vp, r0, x0, r1, x1)) {
                prev_pixel = detail::to_pixel(r0, x0, vp);
                detail::visit(img, prev_pixel, opts.intensity_step);
                prev_drawn = true;
            }
            continue;
        }
        const auto& prev_pt = locus.points[i - 1];
        double r0 = prev_pt.r, x0 = prev_pt.x, r1 = pt.r, x1 = pt.x;
        if (!detail::clip_segment(vp, r0, x0, r1, x1)) {
            prev_drawn = false;
            continue;
        }
        const auto a = detail::to_pixel(r0, x0, vp);
        const auto b = detail::to_pixel(r1, x1, vp);
        const bool skip_first = prev_drawn && a.row == prev_pixel.row && a.col == prev_pixel.col;
        detail::draw_segment(img, a, b, opts.intensity_step, skip_first);
        prev_pixel = b;
        prev_drawn = true;
    }
    return img;
}

/// Pixel values scaled from [0,255] to [0,1].
inline NormalizedImage normalize_pixels(const RasterImage& img) {
    NormalizedImage out;
    out.height = img.height;
    out.width = img.width;
    out.pixels.resize(img.pixels.size());
    for (std::size_t i = 0; i < img.pixels.size(); ++i) out.pixels[i] = img.pixels[i] / 255.0;
    return out;
}

inline void write_pgm(const RasterImage& img, const std::string& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("write_pgm: cannot open " + path);
    f << "P5\n" << img.width << " " << img.height << "\n255\n";
    f.write(reinterpret_cast<const char*>(img.pixels.data()),
            static_cast<std::streamsize>(img.pixels.size()));
    if (!f) throw std::runtime_error("write_pgm: write failed for " + path);
}

/// Binary PGM reader, restricted to what write_pgm emits (P5, maxval 255).
inline RasterImage read_pgm(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("read_pgm: cannot open " + path);
    std::string magic;
    f >> magic;
    if (magic != "P5") throw std::runtime_error("read_pgm: only binary P5 supported");
    int width = 0, height = 0, maxval = 0;
    f >> width >> height >> maxval;
    if (!f || width <= 0 || height <= 0) throw std::runtime_error("read_pgm: malformed header");
    if (maxval != 255) throw std::runtime_error("read_pgm: maxval must be 255");
    f.get();  // single whitespace after maxval
    RasterImage img;
    img.width = width;
    img.height = height;
    img.pixels.resize(static_cast<std::size_t>(width) * height);
    f.read(reinterpret_cast<char*>(img.pixels.data()), static_cast<std::streamsize>(img.pixels.size()));
    if (f.gcount() != static_cast<std::streamsize>(img.pixels.size()))
        throw std::runtime_error("read_pgm: truncated payload");
    return img;
}

}  // namespace faultloc

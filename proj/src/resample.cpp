#include "lsrna/resample.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace lsrna {

namespace {

double cubic_keys(double x) {
    const double a = -0.5;
    x = std::fabs(x);
    if (x < 1.0) return (a + 2.0) * x * x * x - (a + 3.0) * x * x + 1.0;
    if (x < 2.0) return a * x * x * x - 5.0 * a * x * x + 8.0 * a * x - 4.0 * a;
    return 0.0;
}

double lanczos3(double x) {
    x = std::fabs(x);
    if (x < 1e-12) return 1.0;
    if (x >= 3.0) return 0.0;
    const double pix = M_PI * x;
    return 3.0 * std::sin(pix) * std::sin(pix / 3.0) / (pix * pix);
}

struct FilterTap {
    int index;
    double weight;
};

// Per-output-coordinate taps for a separable filter with support
// `radius` (scaled when minifying) and normalized weights.
std::vector<std::vector<FilterTap>> build_taps(int in_size, int out_size,
                                               double radius,
                                               double (*kernel)(double)) {
    std::vector<std::vector<FilterTap>> taps(out_size);
    const double scale = static_cast<double>(in_size) / out_size;
    const double filter_scale = std::max(1.0, scale);
    const double support = radius * filter_scale;
    for (int o = 0; o < out_size; ++o) {
        const double center = (o + 0.5) * scale - 0.5;
        const int lo = static_cast<int>(std::floor(center - support));
        const int hi = static_cast<int>(std::ceil(center + support));
        double sum = 0.0;
        for (int i = lo; i <= hi; ++i) {
            const double w = kernel((i - center) / filter_scale);
            if (w == 0.0) continue;
            taps[o].push_back({std::clamp(i, 0, in_size - 1), w});
            sum += w;
        }
        for (auto& t : taps[o]) t.weight /= sum;
    }
    return taps;
}

Tensor apply_separable(const Tensor& src, int out_h, int out_w, double radius,
                       double (*kernel)(double)) {
    if (out_h < 1 || out_w < 1)
        throw std::invalid_argument("resize: target size must be positive");
    if (src.empty()) throw std::invalid_argument("resize: empty input");
    const auto col_taps = build_taps(src.width, out_w, radius, kernel);
    const auto row_taps = build_taps(src.height, out_h, radius, kernel);

    // Horizontal pass, then vertical.
    Tensor tmp(src.height, out_w, src.channels);
    for (int y = 0; y < src.height; ++y)
        for (int x = 0; x < out_w; ++x)
            for (int c = 0; c < src.channels; ++c) {
                double acc = 0.0;
                for (const auto& t : col_taps[x]) acc += t.weight * src.at(y, t.index, c);
                tmp.at(y, x, c) = static_cast<float>(acc);
            }
    Tensor out(out_h, out_w, src.channels);
    for (int y = 0; y < out_h; ++y)
        for (int x = 0; x < out_w; ++x)
            for (int c = 0; c < src.channels; ++c) {
                double acc = 0.0;
                for (const auto& t : row_taps[y]) acc += t.weight * tmp.at(t.index, x, c);
                out.at(y, x, c) = static_cast<float>(acc);
            }
    return out;
}

}  // namespace

Tensor resize_bicubic(const Tensor& src, int out_h, int out_w) {
    return apply_separable(src, out_h, out_w, 2.0, cubic_keys);
}

Tensor resize_lanczos3(const Tensor& src, int out_h, int out_w) {
    return apply_separable(src, out_h, out_w, 3.0, lanczos3);
}

Tensor resize_area(const Tensor& src, int out_h, int out_w) {
    if (out_h < 1 || out_w < 1)
        throw std::invalid_argument("resize_area: target size must be positive");
    if (out_h > src.height || out_w > src.width)
        throw std::invalid_argument("resize_area: target exceeds input size");
    Tensor out(out_h, out_w, src.channels);
    const double sy = static_cast<double>(src.height) / out_h;
    const double sx = static_cast<double>(src.width) / out_w;
    for (int oy = 0; oy < out_h; ++oy) {
        const double y0 = oy * sy, y1 = (oy + 1) * sy;
        for (int ox = 0; ox < out_w; ++ox) {
            const double x0 = ox * sx, x1 = (ox + 1) * sx;
            for (int c = 0; c < src.channels; ++c) {
                double acc = 0.0;
                for (int iy = static_cast<int>(std::floor(y0));
                     iy < static_cast<int>(std::ceil(y1)); ++iy) {
                    const double hy = std::min<double>(iy + 1, y1) - std::max<double>(iy, y0);
                    for (int ix = static_cast<int>(std::floor(x0));
                         ix < static_cast<int>(std::ceil(x1)); ++ix) {
                        const double hx =
                            std::min<double>(ix + 1, x1) - std::max<double>(ix, x0);
                        acc += hy * hx * src.at(iy, ix, c);
                    }
                }
                out.at(oy, ox, c) = static_cast<float>(acc / (sy * sx));
            }
        }
    }
    return out;
}

Tensor resize_nearest(const Tensor& src, int out_h, int out_w) {
    if (out_h < 1 || out_w < 1)
        throw std::invalid_argument("resize_nearest: target size must be positive");
    Tensor out(out_h, out_w, src.channels);
    for (int y = 0; y < out_h; ++y) {
        int sy = std::min(src.height - 1, y * src.height / out_h);
        for (int x = 0; x < out_w; ++x) {
            int sx = std::min(src.width - 1, x * src.width / out_w);
            for (int c = 0; c < src.channels; ++c) out.at(y, x, c) = src.at(sy, sx, c);
        }
    }
    return out;
}

}  // namespace lsrna

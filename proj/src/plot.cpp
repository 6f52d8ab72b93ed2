#include "lsrna/plot.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "lsrna/image_io.hpp"
#include "lsrna/tensor.hpp"

namespace lsrna::plot {

namespace {

void put(Tensor& img, int y, int x, float r, float g, float b) {
    if (y < 0 || y >= img.height || x < 0 || x >= img.width) return;
    img.at(y, x, 0) = r;
    img.at(y, x, 1) = g;
    img.at(y, x, 2) = b;
}

void line(Tensor& img, int y0, int x0, int y1, int x1, float r, float g, float b) {
    int dx = std::abs(x1 - x0), dy = -std::abs(y1 - y0);
    int sx = x0 < x1 ? 1 : -1, sy = y0 < y1 ? 1 : -1;
    int err = dx + dy;
    while (true) {
        put(img, y0, x0, r, g, b);
        if (x0 == x1 && y0 == y1) break;
        int e2 = 2 * err;
        if (e2 >= dy) { err += dy; x0 += sx; }
        if (e2 <= dx) { err += dx; y0 += sy; }
    }
}

// 3x5 digit/char glyphs for the handful of characters a chart title needs.
const char* glyph(char c) {
    switch (c) {
        case '0': return "111101101101111";
        case '1': return "010110010010111";
        case '2': return "111001111100111";
        case '3': return "111001111001111";
        case '4': return "101101111001001";
        case '5': return "111100111001111";
        case '6': return "111100111101111";
        case '7': return "111001010010010";
        case '8': return "111101111101111";
        case '9': return "111101111001111";
        case '.': return "000000000000010";
        case '-': return "000000111000000";
        case '=': return "000111000111000";
        default: return nullptr;
    }
}

void draw_text(Tensor& img, int y, int x, const std::string& s) {
    for (char c : s) {
        const char* g = glyph(static_cast<char>(std::tolower(c)));
        if (g) {
            for (int gy = 0; gy < 5; ++gy)
                for (int gx = 0; gx < 3; ++gx)
                    if (g[gy * 3 + gx] == '1') put(img, y + gy, x + gx, 0.1f, 0.1f, 0.1f);
        }
        x += 4;
    }
}

}  // namespace

void render_chart(const std::vector<Series>& series, const std::string& title,
                  const std::string& path, int width, int height) {
    Tensor img(height, width, 3);
    std::fill(img.data.begin(), img.data.end(), 1.0f);

    const int ml = 40, mr = 12, mt = 16, mb = 24;
    const int px0 = ml, px1 = width - mr, py0 = mt, py1 = height - mb;

    double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin;
    double ymin = xmin, ymax = -xmin;
    for (const auto& s : series)
        for (size_t i = 0; i < s.xs.size(); ++i) {
            xmin = std::min(xmin, s.xs[i]);
            xmax = std::max(xmax, s.xs[i]);
            ymin = std::min(ymin, s.ys[i]);
            ymax = std::max(ymax, s.ys[i]);
        }
    if (!std::isfinite(xmin)) { xmin = 0; xmax = 1; ymin = 0; ymax = 1; }
    if (xmax - xmin < 1e-12) xmax = xmin + 1;
    if (ymax - ymin < 1e-12) ymax = ymin + 1;

    auto to_px = [&](double x) {
        return px0 + static_cast<int>(std::lround((x - xmin) / (xmax - xmin) * (px1 - px0)));
    };
    auto to_py = [&](double y) {
        return py1 - static_cast<int>(std::lround((y - ymin) / (ymax - ymin) * (py1 - py0)));
    };

    line(img, py1, px0, py1, px1, 0.3f, 0.3f, 0.3f);
    line(img, py0, px0, py1, px0, 0.3f, 0.3f, 0.3f);

    for (const auto& s : series) {
        for (size_t i = 1; i < s.xs.size(); ++i) {
            line(img, to_py(s.ys[i - 1]), to_px(s.xs[i - 1]), to_py(s.ys[i]), to_px(s.xs[i]),
                 s.r, s.g, s.b);
        }
    }

    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.4g", ymax);
    draw_text(img, py0 - 6, 2, buf);
    std::snprintf(buf, sizeof(buf), "%.4g", ymin);
    draw_text(img, py1 - 2, 2, buf);
    std::snprintf(buf, sizeof(buf), "%.4g", xmin);
    draw_text(img, py1 + 4, px0, buf);
    std::snprintf(buf, sizeof(buf), "%.4g", xmax);
    draw_text(img, py1 + 4, px1 - 20, buf);
    draw_text(img, 4, px0, title);

    lsrna::write_png(path, img);
}

}  // namespace lsrna::plot

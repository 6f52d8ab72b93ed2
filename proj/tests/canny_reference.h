// Shared test-side reference implementation of the edge detector plus the
// dilation-tolerant agreement measure. Written independently of the
// production code path: double precision, fused loops, fixed-point
// hysteresis instead of BFS.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "lsrna/tensor.hpp"

namespace canny_ref {

struct Result {
    std::vector<uint8_t> edges;   // 0/1 final map
    std::vector<double> nms_mag;  // post-NMS magnitude (0 where suppressed)
};

inline Result run(const lsrna::RgbImage& img, double low, double high, double sigma) {
    const int h = img.height, w = img.width;
    std::vector<double> gray(static_cast<size_t>(h) * w);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            gray[y * w + x] = 255.0 * (0.299 * img.at(y, x, 0) + 0.587 * img.at(y, x, 1) +
                                       0.114 * img.at(y, x, 2));

    std::vector<double> blurred = gray;
    if (sigma > 0) {
        double k[5], ks = 0;
        for (int i = 0; i < 5; ++i) {
            k[i] = std::exp(-(i - 2.0) * (i - 2.0) / (2 * sigma * sigma));
            ks += k[i];
        }
        for (double& v : k) v /= ks;
        auto cl = [](int v, int hi) { return std::min(std::max(v, 0), hi); };
        std::vector<double> tmp(gray.size());
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x) {
                double a = 0;
                for (int i = 0; i < 5; ++i) a += k[i] * gray[y * w + cl(x + i - 2, w - 1)];
                tmp[y * w + x] = a;
            }
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x) {
                double a = 0;
                for (int i = 0; i < 5; ++i) a += k[i] * tmp[cl(y + i - 2, h - 1) * w + x];
                blurred[y * w + x] = a;
            }
    }

    auto px = [&](int y, int x) {
        y = std::min(std::max(y, 0), h - 1);
        x = std::min(std::max(x, 0), w - 1);
        return blurred[y * w + x];
    };
    std::vector<double> mag(gray.size());
    std::vector<int> bin(gray.size());
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            double gx = px(y - 1, x + 1) + 2 * px(y, x + 1) + px(y + 1, x + 1) -
                        px(y - 1, x - 1) - 2 * px(y, x - 1) - px(y + 1, x - 1);
            double gy = px(y + 1, x - 1) + 2 * px(y + 1, x) + px(y + 1, x + 1) -
                        px(y - 1, x - 1) - 2 * px(y - 1, x) - px(y - 1, x + 1);
            mag[y * w + x] = std::hypot(gx, gy);
            double a = std::atan2(gy, gx) * 180.0 / M_PI;
            if (a < 0) a += 180.0;
            bin[y * w + x] =
                (a < 22.5 || a >= 157.5) ? 0 : (a < 67.5 ? 1 : (a < 112.5 ? 2 : 3));
        }

    const int nb[4][2][2] = {
        {{0, -1}, {0, 1}}, {{-1, 1}, {1, -1}}, {{-1, 0}, {1, 0}}, {{-1, -1}, {1, 1}}};
    auto m = [&](int y, int x) -> double {
        if (y < 0 || y >= h || x < 0 || x >= w) return 0;
        return mag[y * w + x];
    };
    Result r;
    r.nms_mag.assign(gray.size(), 0.0);
    std::vector<uint8_t> state(gray.size(), 0);  // 0 none, 1 weak, 2 strong
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            const int i = y * w + x;
            const int d = bin[i];
            const bool keep = mag[i] >= m(y + nb[d][0][0], x + nb[d][0][1]) &&
                              mag[i] >= m(y + nb[d][1][0], x + nb[d][1][1]);
            if (!keep) continue;
            r.nms_mag[i] = mag[i];
            if (mag[i] >= high)
                state[i] = 2;
            else if (mag[i] > low)
                state[i] = 1;
        }
    bool changed = true;
    while (changed) {
        changed = false;
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x) {
                if (state[y * w + x] != 1) continue;
                for (int dy = -1; dy <= 1 && state[y * w + x] == 1; ++dy)
                    for (int dx = -1; dx <= 1; ++dx) {
                        int ny = y + dy, nx = x + dx;
                        if (ny < 0 || ny >= h || nx < 0 || nx >= w) continue;
                        if (state[ny * w + nx] == 2) {
                            state[y * w + x] = 2;
                            changed = true;
                            break;
                        }
                    }
            }
    }
    r.edges.assign(gray.size(), 0);
    for (size_t i = 0; i < r.edges.size(); ++i) r.edges[i] = state[i] == 2 ? 1 : 0;
    return r;
}

// Fraction of pixels where the two maps agree, counting a mismatch as
// agreement when the other map has an edge within one pixel.
inline double dilated_agreement(const lsrna::Tensor& a, const std::vector<uint8_t>& b) {
    const int h = a.height, w = a.width;
    auto near_hit = [&](int y, int x, auto get) {
        for (int dy = -1; dy <= 1; ++dy)
            for (int dx = -1; dx <= 1; ++dx) {
                int ny = y + dy, nx = x + dx;
                if (ny < 0 || ny >= h || nx < 0 || nx >= w) continue;
                if (get(ny, nx)) return true;
            }
        return false;
    };
    int agree = 0;
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            bool va = a.at(y, x, 0) > 0.5f;
            bool vb = b[y * w + x] != 0;
            bool ok;
            if (va == vb)
                ok = true;
            else if (va)
                ok = near_hit(y, x, [&](int yy, int xx) { return b[yy * w + xx] != 0; });
            else
                ok = near_hit(y, x, [&](int yy, int xx) { return a.at(yy, xx, 0) > 0.5f; });
            if (ok) ++agree;
        }
    return static_cast<double>(agree) / (h * w);
}

}  // namespace canny_ref

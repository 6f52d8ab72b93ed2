#include "lsrna/rna.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <vector>

#include "lsrna/resample.hpp"

namespace lsrna::rna {

void RnaConfig::validate() const {
    if (e_min < 0.0f || e_min > e_max)
        throw std::invalid_argument("RnaConfig: need 0 <= e_min <= e_max");
    if (canny_low > canny_high)
        throw std::invalid_argument("RnaConfig: need canny_low <= canny_high");
    if (blur_sigma < 0.0f)
        throw std::invalid_argument("RnaConfig: blur_sigma must be >= 0");
}

namespace {

// 5x5 Gaussian blur, edge-clamped. sigma == 0 skips smoothing.
Tensor gaussian_blur5(const Tensor& gray, float sigma) {
    if (sigma <= 0.0f) return gray;
    float kernel[5];
    float sum = 0.0f;
    for (int i = 0; i < 5; ++i) {
        const float d = static_cast<float>(i - 2);
        kernel[i] = std::exp(-d * d / (2.0f * sigma * sigma));
        sum += kernel[i];
    }
    for (float& k : kernel) k /= sum;

    Tensor tmp(gray.height, gray.width, 1);
    for (int y = 0; y < gray.height; ++y)
        for (int x = 0; x < gray.width; ++x) {
            float acc = 0.0f;
            for (int i = 0; i < 5; ++i)
                acc += kernel[i] * gray.at(y, std::clamp(x + i - 2, 0, gray.width - 1), 0);
            tmp.at(y, x, 0) = acc;
        }
    Tensor out(gray.height, gray.width, 1);
    for (int y = 0; y < gray.height; ++y)
        for (int x = 0; x < gray.width; ++x) {
            float acc = 0.0f;
            for (int i = 0; i < 5; ++i)
                acc += kernel[i] * tmp.at(std::clamp(y + i - 2, 0, gray.height - 1), x, 0);
            out.at(y, x, 0) = acc;
        }
    return out;
}

}  // namespace

EdgeMap canny_edges(const RgbImage& image, const RnaConfig& config) {
    return canny_edges_traced(image, config).edges;
}

CannyTrace canny_edges_traced(const RgbImage& image, const RnaConfig& config) {
    config.validate();
    if (image.empty()) throw std::invalid_argument("canny_edges: empty image");
    const int h = image.height, w = image.width;

    // Intensity on the 0..255 scale so the thresholds read like the
    // usual 8-bit convention.
    Tensor gray = to_grayscale(image);
    for (float& v : gray.data) v *= 255.0f;
    gray = gaussian_blur5(gray, config.blur_sigma);

    // Sobel gradients, edge-clamped.
    std::vector<float> mag(static_cast<size_t>(h) * w, 0.0f);
    std::vector<uint8_t> dir(static_cast<size_t>(h) * w, 0);
    auto g = [&](int y, int x) {
        return gray.at(std::clamp(y, 0, h - 1), std::clamp(x, 0, w - 1), 0);
    };
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            const float gx = -g(y - 1, x - 1) - 2 * g(y, x - 1) - g(y + 1, x - 1) +
                             g(y - 1, x + 1) + 2 * g(y, x + 1) + g(y + 1, x + 1);
            const float gy = -g(y - 1, x - 1) - 2 * g(y - 1, x) - g(y - 1, x + 1) +
                             g(y + 1, x - 1) + 2 * g(y + 1, x) + g(y + 1, x + 1);
            const size_t i = static_cast<size_t>(y) * w + x;
            mag[i] = std::sqrt(gx * gx + gy * gy);
            // Quantize the gradient direction to 4 bins.
            float angle = std::atan2(gy, gx) * 180.0f / static_cast<float>(M_PI);
            if (angle < 0.0f) angle += 180.0f;
            if (angle < 22.5f || angle >= 157.5f)
                dir[i] = 0;  // horizontal gradient -> compare left/right
            else if (angle < 67.5f)
                dir[i] = 1;  // diagonal
            else if (angle < 112.5f)
                dir[i] = 2;  // vertical gradient -> compare up/down
            else
                dir[i] = 3;
        }

    // Non-maximum suppression along the gradient direction.
    static const int offs[4][2][2] = {
        {{0, -1}, {0, 1}}, {{-1, 1}, {1, -1}}, {{-1, 0}, {1, 0}}, {{-1, -1}, {1, 1}}};
    auto mag_at = [&](int y, int x) -> float {
        if (y < 0 || y >= h || x < 0 || x >= w) return 0.0f;
        return mag[static_cast<size_t>(y) * w + x];
    };
    std::vector<float> nms(static_cast<size_t>(h) * w, 0.0f);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            const size_t i = static_cast<size_t>(y) * w + x;
            const int d = dir[i];
            if (mag[i] >= mag_at(y + offs[d][0][0], x + offs[d][0][1]) &&
                mag[i] >= mag_at(y + offs[d][1][0], x + offs[d][1][1]))
                nms[i] = mag[i];
        }

    // Double threshold: strong seeds, weak candidates.
    enum : uint8_t { kNone = 0, kWeak = 1, kStrong = 2 };
    std::vector<uint8_t> cls(static_cast<size_t>(h) * w, kNone);
    std::deque<int> frontier;
    for (int i = 0; i < h * w; ++i) {
        if (nms[i] >= config.canny_high) {
            cls[i] = kStrong;
            frontier.push_back(i);
        } else if (nms[i] > config.canny_low) {
            cls[i] = kWeak;
        }
    }

    // Hysteresis: weak pixels survive only when 8-connected to a strong
    // pixel through other retained pixels.
    EdgeMap edges(h, w, 1);
    while (!frontier.empty()) {
        const int i = frontier.front();
        frontier.pop_front();
        const int y = i / w, x = i % w;
        edges.at(y, x, 0) = 1.0f;
        for (int dy = -1; dy <= 1; ++dy)
            for (int dx = -1; dx <= 1; ++dx) {
                const int ny = y + dy, nx = x + dx;
                if (ny < 0 || ny >= h || nx < 0 || nx >= w) continue;
                const int ni = ny * w + nx;
                if (cls[ni] == kWeak) {
                    cls[ni] = kStrong;
                    frontier.push_back(ni);
                }
            }
    }

    CannyTrace trace{std::move(edges), Tensor(h, w, 1)};
    std::copy(nms.begin(), nms.end(), trace.nms_magnitude.data.begin());
    return trace;
}

EdgeDensityMap pool_edge_map(const EdgeMap& edges, int target_h, int target_w) {
    if (edges.channels != 1)
        throw std::invalid_argument("pool_edge_map: expected 1-channel edge map");
    if (target_h < 1 || target_w < 1)
        throw std::invalid_argument("pool_edge_map: zero target size");
    if (target_h > edges.height || target_w > edges.width)
        throw std::invalid_argument("pool_edge_map: target exceeds edge-map size");
    EdgeDensityMap density = resize_area(edges, target_h, target_w);
    for (float& v : density.data) v = std::clamp(v, 0.0f, 1.0f);
    return density;
}

NoiseScaleMap noise_scale_map(const EdgeDensityMap& density, const RnaConfig& config) {
    config.validate();
    NoiseScaleMap scales = density;
    for (float& v : scales.data) {
        if (v < 0.0f || v > 1.0f)
            throw std::invalid_argument("noise_scale_map: density outside [0,1]");
        v = config.e_min + v * (config.e_max - config.e_min);
    }
    return scales;
}

LatentGrid apply_rna_with_noise(const LatentGrid& guidance, const NoiseScaleMap& scales,
                                const Tensor& eps) {
    if (scales.height != guidance.height || scales.width != guidance.width ||
        scales.channels != 1)
        throw std::invalid_argument("apply_rna: scale map " + scales.shape_str() +
                                    " does not match guidance " + guidance.shape_str());
    if (!eps.same_shape(guidance))
        throw std::invalid_argument("apply_rna: noise shape mismatch");
    LatentGrid out = guidance;
    for (int y = 0; y < guidance.height; ++y)
        for (int x = 0; x < guidance.width; ++x) {
            const float scale = scales.at(y, x, 0);
            if (scale == 0.0f) continue;  // bitwise identity for zero scale
            for (int c = 0; c < guidance.channels; ++c)
                out.at(y, x, c) += scale * eps.at(y, x, c);
        }
    return out;
}

LatentGrid apply_rna(const LatentGrid& guidance, const NoiseScaleMap& scales,
                     uint64_t seed) {
    Rng rng(seed);
    return apply_rna_with_noise(
        guidance, scales, rng.normal_tensor(guidance.height, guidance.width, guidance.channels));
}

LatentGrid apply_una(const LatentGrid& guidance, float sigma, uint64_t seed) {
    if (sigma < 0.0f) throw std::invalid_argument("apply_una: sigma must be >= 0");
    NoiseScaleMap scales(guidance.height, guidance.width, 1, sigma);
    return apply_rna(guidance, scales, seed);
}

}  // namespace lsrna::rna

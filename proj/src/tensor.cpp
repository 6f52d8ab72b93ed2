#include "lsrna/tensor.hpp"

#include <algorithm>
#include <cmath>

namespace lsrna {

std::string Tensor::shape_str() const {
    return std::to_string(height) + "x" + std::to_string(width) + "x" +
           std::to_string(channels);
}

bool all_finite(const Tensor& t) {
    for (float v : t.data)
        if (!std::isfinite(v)) return false;
    return true;
}

void require_finite(const Tensor& t, const std::string& what) {
    if (!all_finite(t))
        throw std::invalid_argument(what + ": non-finite values");
}

static void require_same_shape(const Tensor& a, const Tensor& b) {
    if (!a.same_shape(b))
        throw std::invalid_argument("shape mismatch: " + a.shape_str() + " vs " +
                                    b.shape_str());
}

Tensor operator+(const Tensor& a, const Tensor& b) {
    require_same_shape(a, b);
    Tensor out = a;
    for (size_t i = 0; i < out.data.size(); ++i) out.data[i] += b.data[i];
    return out;
}

Tensor operator-(const Tensor& a, const Tensor& b) {
    require_same_shape(a, b);
    Tensor out = a;
    for (size_t i = 0; i < out.data.size(); ++i) out.data[i] -= b.data[i];
    return out;
}

Tensor scaled(const Tensor& a, float s) {
    Tensor out = a;
    for (float& v : out.data) v *= s;
    return out;
}

float mean_abs(const Tensor& t) {
    if (t.empty()) return 0.0f;
    double acc = 0.0;
    for (float v : t.data) acc += std::fabs(v);
    return static_cast<float>(acc / t.data.size());
}

float mean_abs_diff(const Tensor& a, const Tensor& b) {
    require_same_shape(a, b);
    if (a.empty()) return 0.0f;
    double acc = 0.0;
    for (size_t i = 0; i < a.data.size(); ++i)
        acc += std::fabs(a.data[i] - b.data[i]);
    return static_cast<float>(acc / a.data.size());
}

float max_abs_diff(const Tensor& a, const Tensor& b) {
    require_same_shape(a, b);
    float m = 0.0f;
    for (size_t i = 0; i < a.data.size(); ++i)
        m = std::max(m, std::fabs(a.data[i] - b.data[i]));
    return m;
}

Tensor clamp01(const Tensor& t) {
    Tensor out = t;
    for (float& v : out.data) v = std::clamp(v, 0.0f, 1.0f);
    return out;
}

Tensor to_grayscale(const RgbImage& img) {
    if (img.channels == 1) return img;
    if (img.channels != 3)
        throw std::invalid_argument("to_grayscale: expected 1 or 3 channels");
    Tensor out(img.height, img.width, 1);
    for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x)
            out.at(y, x, 0) = 0.299f * img.at(y, x, 0) + 0.587f * img.at(y, x, 1) +
                              0.114f * img.at(y, x, 2);
    return out;
}

Tensor crop(const Tensor& t, int y0, int x0, int h, int w) {
    if (y0 < 0 || x0 < 0 || y0 + h > t.height || x0 + w > t.width)
        throw std::invalid_argument("crop: rectangle out of bounds");
    Tensor out(h, w, t.channels);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            for (int c = 0; c < t.channels; ++c)
                out.at(y, x, c) = t.at(y0 + y, x0 + x, c);
    return out;
}

}  // namespace lsrna

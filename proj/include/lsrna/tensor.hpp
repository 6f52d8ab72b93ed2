#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace lsrna {

// Row-major H x W x C float tensor. The one currency passed between the
// codec, the super-resolution module, noise addition and the sampler.
struct Tensor {
    int height = 0;
    int width = 0;
    int channels = 0;
    std::vector<float> data;

    Tensor() = default;
    Tensor(int h, int w, int c, float fill = 0.0f)
        : height(h), width(w), channels(c),
          data(static_cast<size_t>(h) * w * c, fill) {
        if (h < 0 || w < 0 || c < 0)
            throw std::invalid_argument("Tensor: negative dimension");
    }

    size_t size() const { return data.size(); }
    bool empty() const { return data.empty(); }

    float& at(int y, int x, int c) {
        return data[(static_cast<size_t>(y) * width + x) * channels + c];
    }
    float at(int y, int x, int c) const {
        return data[(static_cast<size_t>(y) * width + x) * channels + c];
    }

    bool same_shape(const Tensor& o) const {
        return height == o.height && width == o.width && channels == o.channels;
    }
    std::string shape_str() const;
};

// Image in [0,1]; latent values are unbounded.
using RgbImage = Tensor;
using LatentGrid = Tensor;

bool all_finite(const Tensor& t);
void require_finite(const Tensor& t, const std::string& what);

// Elementwise helpers used across modules.
Tensor operator+(const Tensor& a, const Tensor& b);
Tensor operator-(const Tensor& a, const Tensor& b);
Tensor scaled(const Tensor& a, float s);
float mean_abs(const Tensor& t);
float mean_abs_diff(const Tensor& a, const Tensor& b);
float max_abs_diff(const Tensor& a, const Tensor& b);
Tensor clamp01(const Tensor& t);

// Single-channel Y extraction with Rec.601 weights.
Tensor to_grayscale(const RgbImage& img);

Tensor crop(const Tensor& t, int y0, int x0, int h, int w);

}  // namespace lsrna

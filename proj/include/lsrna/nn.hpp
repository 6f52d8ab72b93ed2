#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "lsrna/archive.hpp"
#include "lsrna/rng.hpp"
#include "lsrna/tensor.hpp"

namespace lsrna::nn {

// Flat parameter block with gradient and Adam state. Layers own their
// params and expose them for the optimizer and for serialization.
struct Param {
    std::string name;
    std::vector<float> v;  // values
    std::vector<float> g;  // accumulated gradient
    std::vector<float> m;  // Adam first moment
    std::vector<float> s;  // Adam second moment

    void resize(size_t n) {
        v.assign(n, 0.0f);
        g.assign(n, 0.0f);
        m.assign(n, 0.0f);
        s.assign(n, 0.0f);
    }
    void zero_grad() { std::fill(g.begin(), g.end(), 0.0f); }
};

using ParamRefs = std::vector<Param*>;

void zero_grads(const ParamRefs& params);
size_t param_count(const ParamRefs& params);
void save_params(const ParamRefs& params, TensorArchive& archive);
void load_params(const ParamRefs& params, const TensorArchive& archive);

// Kaiming-uniform init with fan_in.
void init_uniform(Param& p, int fan_in, Rng& rng);

struct AdamConfig {
    float lr = 2e-4f;
    float beta1 = 0.9f;
    float beta2 = 0.999f;
    float eps = 1e-8f;
};

class Adam {
public:
    Adam(ParamRefs params, AdamConfig cfg) : params_(std::move(params)), cfg_(cfg) {}
    void step(float lr_scale = 1.0f);

private:
    ParamRefs params_;
    AdamConfig cfg_;
    int64_t t_ = 0;
};

// Cosine annealing from lr0 to ~0 over total iterations.
inline float cosine_lr_scale(int64_t it, int64_t total) {
    if (total <= 0) return 1.0f;
    return 0.5f * (1.0f + std::cos(M_PI * static_cast<double>(it) / total));
}

// --- Layers. forward() caches what backward() needs; backward() returns
// the input gradient and accumulates parameter gradients. One sample
// (H x W x C) at a time; batching is an outer loop.

class Conv2d {
public:
    Conv2d() = default;
    Conv2d(std::string name, int in_ch, int out_ch, int kernel, int stride, int pad,
           Rng& rng);

    Tensor forward(const Tensor& x);
    Tensor backward(const Tensor& dout);
    void collect(ParamRefs& out);

    int in_ch() const { return in_ch_; }
    int out_ch() const { return out_ch_; }
    Param& weight() { return weight_; }
    Param& bias() { return bias_; }

private:
    int in_ch_ = 0, out_ch_ = 0, kernel_ = 0, stride_ = 1, pad_ = 0;
    Param weight_;  // [out_ch][kernel][kernel][in_ch]
    Param bias_;    // [out_ch]
    Tensor cached_input_;
};

// Dense layer applied position-wise to vectors packed as rows of a
// (count x dim) buffer.
class Linear {
public:
    Linear() = default;
    Linear(std::string name, int in_dim, int out_dim, Rng& rng);

    // x: count rows of in_dim floats.
    std::vector<float> forward(const std::vector<float>& x, int count);
    std::vector<float> backward(const std::vector<float>& dout, int count);
    void collect(ParamRefs& out);

    int in_dim() const { return in_dim_; }
    int out_dim() const { return out_dim_; }
    Param& weight() { return weight_; }
    Param& bias() { return bias_; }

private:
    int in_dim_ = 0, out_dim_ = 0;
    Param weight_;  // [out_dim][in_dim]
    Param bias_;
    std::vector<float> cached_input_;
    int cached_count_ = 0;
};

class ReLU {
public:
    Tensor forward(const Tensor& x);
    Tensor backward(const Tensor& dout);
    std::vector<float> forward(const std::vector<float>& x);
    std::vector<float> backward_vec(const std::vector<float>& dout);

private:
    std::vector<float> mask_;
};

class Sigmoid {
public:
    Tensor forward(const Tensor& x);
    Tensor backward(const Tensor& dout);

private:
    Tensor cached_output_;
};

// LayerNorm over the channel dimension at each spatial position.
class LayerNorm {
public:
    LayerNorm() = default;
    LayerNorm(std::string name, int dim);

    Tensor forward(const Tensor& x);
    Tensor backward(const Tensor& dout);
    void collect(ParamRefs& out);

private:
    int dim_ = 0;
    Param gamma_, beta_;
    Tensor cached_input_;
    std::vector<float> cached_mean_, cached_inv_std_;
};

// Single-head self-attention within non-overlapping windows. Inputs not
// divisible by the window size are zero-padded and cropped back.
class WindowAttention {
public:
    WindowAttention() = default;
    WindowAttention(std::string name, int dim, int window, Rng& rng);

    Tensor forward(const Tensor& x);
    Tensor backward(const Tensor& dout);
    void collect(ParamRefs& out);

private:
    int dim_ = 0, window_ = 0;
    Linear qkv_, proj_;
    // Cached per-window tensors for backward.
    struct WindowCache {
        std::vector<float> q, k, v, attn, attn_out;
        int tokens = 0;
    };
    std::vector<WindowCache> caches_;
    int padded_h_ = 0, padded_w_ = 0, in_h_ = 0, in_w_ = 0;
};

Tensor upsample_nearest2x(const Tensor& x);
Tensor upsample_nearest2x_backward(const Tensor& dout);

// Sinusoidal embedding of a scalar (timestep) into `dim` features.
std::vector<float> sinusoidal_embedding(float t, int dim);

}  // namespace lsrna::nn

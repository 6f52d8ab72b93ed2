#include "lsrna/nn.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>

namespace lsrna::nn {

using RowMat = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapMat = Eigen::Map<RowMat>;
using ConstMapMat = Eigen::Map<const RowMat>;

void zero_grads(const ParamRefs& params) {
    for (Param* p : params) p->zero_grad();
}

size_t param_count(const ParamRefs& params) {
    size_t n = 0;
    for (Param* p : params) n += p->v.size();
    return n;
}

void save_params(const ParamRefs& params, TensorArchive& archive) {
    for (Param* p : params) {
        Tensor t(1, 1, static_cast<int>(p->v.size()));
        t.data = p->v;
        archive.put(p->name, t);
    }
}

void load_params(const ParamRefs& params, const TensorArchive& archive) {
    for (Param* p : params) {
        const Tensor& t = archive.get(p->name);
        if (t.data.size() != p->v.size())
            throw std::runtime_error("load_params: size mismatch for " + p->name);
        p->v = t.data;
    }
}

void init_uniform(Param& p, int fan_in, Rng& rng) {
    const float bound = 1.0f / std::sqrt(static_cast<float>(std::max(1, fan_in)));
    for (float& v : p.v) v = (2.0f * rng.uniform() - 1.0f) * bound;
}

void Adam::step(float lr_scale) {
    ++t_;
    const float lr = cfg_.lr * lr_scale;
    const float bc1 = 1.0f - std::pow(cfg_.beta1, static_cast<float>(t_));
    const float bc2 = 1.0f - std::pow(cfg_.beta2, static_cast<float>(t_));
    for (Param* p : params_) {
        for (size_t i = 0; i < p->v.size(); ++i) {
            p->m[i] = cfg_.beta1 * p->m[i] + (1.0f - cfg_.beta1) * p->g[i];
            p->s[i] = cfg_.beta2 * p->s[i] + (1.0f - cfg_.beta2) * p->g[i] * p->g[i];
            const float mhat = p->m[i] / bc1;
            const float shat = p->s[i] / bc2;
            p->v[i] -= lr * mhat / (std::sqrt(shat) + cfg_.eps);
        }
    }
}

// --- Conv2d -----------------------------------------------------------

Conv2d::Conv2d(std::string name, int in_ch, int out_ch, int kernel, int stride,
               int pad, Rng& rng)
    : in_ch_(in_ch), out_ch_(out_ch), kernel_(kernel), stride_(stride), pad_(pad) {
    weight_.name = name + ".weight";
    weight_.resize(static_cast<size_t>(out_ch) * kernel * kernel * in_ch);
    bias_.name = name + ".bias";
    bias_.resize(static_cast<size_t>(out_ch));
    init_uniform(weight_, kernel * kernel * in_ch, rng);
    init_uniform(bias_, kernel * kernel * in_ch, rng);
}

static void im2col(const Tensor& x, int kernel, int stride, int pad, int oh, int ow,
                   std::vector<float>& cols) {
    const int k2c = kernel * kernel * x.channels;
    cols.assign(static_cast<size_t>(k2c) * oh * ow, 0.0f);
    for (int oy = 0; oy < oh; ++oy)
        for (int ox = 0; ox < ow; ++ox) {
            const size_t col = static_cast<size_t>(oy) * ow + ox;
            size_t row = 0;
            for (int ky = 0; ky < kernel; ++ky) {
                const int iy = oy * stride - pad + ky;
                for (int kx = 0; kx < kernel; ++kx) {
                    const int ix = ox * stride - pad + kx;
                    if (iy >= 0 && iy < x.height && ix >= 0 && ix < x.width) {
                        for (int c = 0; c < x.channels; ++c)
                            cols[(row + c) * static_cast<size_t>(oh) * ow + col] =
                                x.at(iy, ix, c);
                    }
                    row += x.channels;
                }
            }
        }
}

Tensor Conv2d::forward(const Tensor& x) {
    if (x.channels != in_ch_)
        throw std::invalid_argument("Conv2d: channel mismatch");
    cached_input_ = x;
    const int oh = (x.height + 2 * pad_ - kernel_) / stride_ + 1;
    const int ow = (x.width + 2 * pad_ - kernel_) / stride_ + 1;
    const int k2c = kernel_ * kernel_ * in_ch_;

    std::vector<float> cols;
    im2col(x, kernel_, stride_, pad_, oh, ow, cols);
    ConstMapMat w(weight_.v.data(), out_ch_, k2c);
    ConstMapMat c(cols.data(), k2c, oh * ow);
    RowMat y = w * c;

    Tensor out(oh, ow, out_ch_);
    for (int yy = 0; yy < oh; ++yy)
        for (int xx = 0; xx < ow; ++xx)
            for (int oc = 0; oc < out_ch_; ++oc)
                out.at(yy, xx, oc) = y(oc, yy * ow + xx) + bias_.v[oc];
    return out;
}

Tensor Conv2d::backward(const Tensor& dout) {
    const Tensor& x = cached_input_;
    const int oh = dout.height, ow = dout.width;
    const int k2c = kernel_ * kernel_ * in_ch_;

    RowMat dy(out_ch_, oh * ow);
    for (int yy = 0; yy < oh; ++yy)
        for (int xx = 0; xx < ow; ++xx)
            for (int oc = 0; oc < out_ch_; ++oc)
                dy(oc, yy * ow + xx) = dout.at(yy, xx, oc);

    std::vector<float> cols;
    im2col(x, kernel_, stride_, pad_, oh, ow, cols);
    ConstMapMat c(cols.data(), k2c, oh * ow);
    MapMat dw(weight_.g.data(), out_ch_, k2c);
    dw.noalias() += dy * c.transpose();
    for (int oc = 0; oc < out_ch_; ++oc) bias_.g[oc] += dy.row(oc).sum();

    ConstMapMat w(weight_.v.data(), out_ch_, k2c);
    RowMat dcols = w.transpose() * dy;

    Tensor din(x.height, x.width, x.channels);
    for (int oy = 0; oy < oh; ++oy)
        for (int ox = 0; ox < ow; ++ox) {
            const int col = oy * ow + ox;
            int row = 0;
            for (int ky = 0; ky < kernel_; ++ky) {
                const int iy = oy * stride_ - pad_ + ky;
                for (int kx = 0; kx < kernel_; ++kx) {
                    const int ix = ox * stride_ - pad_ + kx;
                    if (iy >= 0 && iy < x.height && ix >= 0 && ix < x.width)
                        for (int cc = 0; cc < x.channels; ++cc)
                            din.at(iy, ix, cc) += dcols(row + cc, col);
                    row += x.channels;
                }
            }
        }
    return din;
}

void Conv2d::collect(ParamRefs& out) {
    out.push_back(&weight_);
    out.push_back(&bias_);
}

// --- Linear -----------------------------------------------------------

Linear::Linear(std::string name, int in_dim, int out_dim, Rng& rng)
    : in_dim_(in_dim), out_dim_(out_dim) {
    weight_.name = name + ".weight";
    weight_.resize(static_cast<size_t>(out_dim) * in_dim);
    bias_.name = name + ".bias";
    bias_.resize(static_cast<size_t>(out_dim));
    init_uniform(weight_, in_dim, rng);
    init_uniform(bias_, in_dim, rng);
}

std::vector<float> Linear::forward(const std::vector<float>& x, int count) {
    if (x.size() != static_cast<size_t>(count) * in_dim_)
        throw std::invalid_argument("Linear: input size mismatch");
    cached_input_ = x;
    cached_count_ = count;
    ConstMapMat xm(x.data(), count, in_dim_);
    ConstMapMat wm(weight_.v.data(), out_dim_, in_dim_);
    std::vector<float> y(static_cast<size_t>(count) * out_dim_);
    MapMat ym(y.data(), count, out_dim_);
    ym.noalias() = xm * wm.transpose();
    for (int i = 0; i < count; ++i)
        for (int o = 0; o < out_dim_; ++o) ym(i, o) += bias_.v[o];
    return y;
}

std::vector<float> Linear::backward(const std::vector<float>& dout, int count) {
    ConstMapMat dym(dout.data(), count, out_dim_);
    ConstMapMat xm(cached_input_.data(), count, in_dim_);
    MapMat dwm(weight_.g.data(), out_dim_, in_dim_);
    dwm.noalias() += dym.transpose() * xm;
    for (int o = 0; o < out_dim_; ++o) bias_.g[o] += dym.col(o).sum();

    ConstMapMat wm(weight_.v.data(), out_dim_, in_dim_);
    std::vector<float> dx(static_cast<size_t>(count) * in_dim_);
    MapMat dxm(dx.data(), count, in_dim_);
    dxm.noalias() = dym * wm;
    return dx;
}

void Linear::collect(ParamRefs& out) {
    out.push_back(&weight_);
    out.push_back(&bias_);
}

// --- Activations ------------------------------------------------------

Tensor ReLU::forward(const Tensor& x) {
    mask_.assign(x.data.size(), 0.0f);
    Tensor out = x;
    for (size_t i = 0; i < x.data.size(); ++i) {
        if (x.data[i] > 0.0f)
            mask_[i] = 1.0f;
        else
            out.data[i] = 0.0f;
    }
    return out;
}

Tensor ReLU::backward(const Tensor& dout) {
    Tensor din = dout;
    for (size_t i = 0; i < din.data.size(); ++i) din.data[i] *= mask_[i];
    return din;
}

std::vector<float> ReLU::forward(const std::vector<float>& x) {
    mask_.assign(x.size(), 0.0f);
    std::vector<float> out = x;
    for (size_t i = 0; i < x.size(); ++i) {
        if (x[i] > 0.0f)
            mask_[i] = 1.0f;
        else
            out[i] = 0.0f;
    }
    return out;
}

std::vector<float> ReLU::backward_vec(const std::vector<float>& dout) {
    std::vector<float> din = dout;
    for (size_t i = 0; i < din.size(); ++i) din[i] *= mask_[i];
    return din;
}

Tensor Sigmoid::forward(const Tensor& x) {
    Tensor out = x;
    for (float& v : out.data) v = 1.0f / (1.0f + std::exp(-v));
    cached_output_ = out;
    return out;
}

Tensor Sigmoid::backward(const Tensor& dout) {
    Tensor din = dout;
    for (size_t i = 0; i < din.data.size(); ++i) {
        const float y = cached_output_.data[i];
        din.data[i] *= y * (1.0f - y);
    }
    return din;
}

// --- LayerNorm --------------------------------------------------------

LayerNorm::LayerNorm(std::string name, int dim) : dim_(dim) {
    gamma_.name = name + ".gamma";
    gamma_.resize(dim);
    std::fill(gamma_.v.begin(), gamma_.v.end(), 1.0f);
    beta_.name = name + ".beta";
    beta_.resize(dim);
}

Tensor LayerNorm::forward(const Tensor& x) {
    if (x.channels != dim_) throw std::invalid_argument("LayerNorm: dim mismatch");
    cached_input_ = x;
    const int n = x.height * x.width;
    cached_mean_.resize(n);
    cached_inv_std_.resize(n);
    Tensor out(x.height, x.width, x.channels);
    for (int i = 0; i < n; ++i) {
        const float* px = &x.data[static_cast<size_t>(i) * dim_];
        float mean = 0.0f;
        for (int c = 0; c < dim_; ++c) mean += px[c];
        mean /= dim_;
        float var = 0.0f;
        for (int c = 0; c < dim_; ++c) var += (px[c] - mean) * (px[c] - mean);
        var /= dim_;
        const float inv_std = 1.0f / std::sqrt(var + 1e-5f);
        cached_mean_[i] = mean;
        cached_inv_std_[i] = inv_std;
        float* po = &out.data[static_cast<size_t>(i) * dim_];
        for (int c = 0; c < dim_; ++c)
            po[c] = gamma_.v[c] * (px[c] - mean) * inv_std + beta_.v[c];
    }
    return out;
}

Tensor LayerNorm::backward(const Tensor& dout) {
    const Tensor& x = cached_input_;
    const int n = x.height * x.width;
    Tensor din(x.height, x.width, dim_);
    for (int i = 0; i < n; ++i) {
        const float* px = &x.data[static_cast<size_t>(i) * dim_];
        const float* pdy = &dout.data[static_cast<size_t>(i) * dim_];
        const float mean = cached_mean_[i];
        const float inv_std = cached_inv_std_[i];
        float sum_dxhat = 0.0f, sum_dxhat_xhat = 0.0f;
        for (int c = 0; c < dim_; ++c) {
            const float xhat = (px[c] - mean) * inv_std;
            const float dxhat = pdy[c] * gamma_.v[c];
            gamma_.g[c] += pdy[c] * xhat;
            beta_.g[c] += pdy[c];
            sum_dxhat += dxhat;
            sum_dxhat_xhat += dxhat * xhat;
        }
        float* pdx = &din.data[static_cast<size_t>(i) * dim_];
        for (int c = 0; c < dim_; ++c) {
            const float xhat = (px[c] - mean) * inv_std;
            const float dxhat = pdy[c] * gamma_.v[c];
            pdx[c] = inv_std * (dxhat - sum_dxhat / dim_ - xhat * sum_dxhat_xhat / dim_);
        }
    }
    return din;
}

void LayerNorm::collect(ParamRefs& out) {
    out.push_back(&gamma_);
    out.push_back(&beta_);
}

// --- WindowAttention --------------------------------------------------

WindowAttention::WindowAttention(std::string name, int dim, int window, Rng& rng)
    : dim_(dim),
      window_(window),
      qkv_(name + ".qkv", dim, 3 * dim, rng),
      proj_(name + ".proj", dim, dim, rng) {}

Tensor WindowAttention::forward(const Tensor& x) {
    if (x.channels != dim_) throw std::invalid_argument("WindowAttention: dim mismatch");
    in_h_ = x.height;
    in_w_ = x.width;
    padded_h_ = (x.height + window_ - 1) / window_ * window_;
    padded_w_ = (x.width + window_ - 1) / window_ * window_;

    Tensor padded(padded_h_, padded_w_, dim_);
    for (int y = 0; y < x.height; ++y)
        for (int xx = 0; xx < x.width; ++xx)
            for (int c = 0; c < dim_; ++c) padded.at(y, xx, c) = x.at(y, xx, c);

    const int wy = padded_h_ / window_, wx = padded_w_ / window_;
    const int tokens = window_ * window_;
    const int n_windows = wy * wx;
    std::vector<float> x_all(static_cast<size_t>(n_windows) * tokens * dim_);
    for (int w = 0; w < n_windows; ++w) {
        const int oy = (w / wx) * window_, ox = (w % wx) * window_;
        for (int t = 0; t < tokens; ++t) {
            const int y = oy + t / window_, xx = ox + t % window_;
            std::copy_n(&padded.at(y, xx, 0), dim_,
                        &x_all[(static_cast<size_t>(w) * tokens + t) * dim_]);
        }
    }

    std::vector<float> qkv = qkv_.forward(x_all, n_windows * tokens);
    const float scale = 1.0f / std::sqrt(static_cast<float>(dim_));

    caches_.assign(n_windows, {});
    std::vector<float> attn_out(static_cast<size_t>(n_windows) * tokens * dim_);
    for (int w = 0; w < n_windows; ++w) {
        WindowCache& cc = caches_[w];
        cc.tokens = tokens;
        cc.q.resize(static_cast<size_t>(tokens) * dim_);
        cc.k.resize(static_cast<size_t>(tokens) * dim_);
        cc.v.resize(static_cast<size_t>(tokens) * dim_);
        for (int t = 0; t < tokens; ++t) {
            const float* row = &qkv[(static_cast<size_t>(w) * tokens + t) * 3 * dim_];
            std::copy_n(row, dim_, &cc.q[static_cast<size_t>(t) * dim_]);
            std::copy_n(row + dim_, dim_, &cc.k[static_cast<size_t>(t) * dim_]);
            std::copy_n(row + 2 * dim_, dim_, &cc.v[static_cast<size_t>(t) * dim_]);
        }
        ConstMapMat q(cc.q.data(), tokens, dim_);
        ConstMapMat k(cc.k.data(), tokens, dim_);
        ConstMapMat v(cc.v.data(), tokens, dim_);
        RowMat s = (q * k.transpose()) * scale;
        for (int i = 0; i < tokens; ++i) {
            const float mx = s.row(i).maxCoeff();
            s.row(i) = (s.row(i).array() - mx).exp();
            s.row(i) /= s.row(i).sum();
        }
        cc.attn.assign(s.data(), s.data() + static_cast<size_t>(tokens) * tokens);
        MapMat o(&attn_out[static_cast<size_t>(w) * tokens * dim_], tokens, dim_);
        o.noalias() = s * v;
    }

    std::vector<float> y_all = proj_.forward(attn_out, n_windows * tokens);

    Tensor out(in_h_, in_w_, dim_);
    for (int w = 0; w < n_windows; ++w) {
        const int oy = (w / wx) * window_, ox = (w % wx) * window_;
        for (int t = 0; t < tokens; ++t) {
            const int y = oy + t / window_, xx = ox + t % window_;
            if (y < in_h_ && xx < in_w_)
                std::copy_n(&y_all[(static_cast<size_t>(w) * tokens + t) * dim_], dim_,
                            &out.at(y, xx, 0));
        }
    }
    return out;
}

Tensor WindowAttention::backward(const Tensor& dout) {
    const int wy = padded_h_ / window_, wx = padded_w_ / window_;
    const int tokens = window_ * window_;
    const int n_windows = wy * wx;
    const float scale = 1.0f / std::sqrt(static_cast<float>(dim_));

    std::vector<float> dy_all(static_cast<size_t>(n_windows) * tokens * dim_, 0.0f);
    for (int w = 0; w < n_windows; ++w) {
        const int oy = (w / wx) * window_, ox = (w % wx) * window_;
        for (int t = 0; t < tokens; ++t) {
            const int y = oy + t / window_, xx = ox + t % window_;
            if (y < in_h_ && xx < in_w_)
                std::copy_n(dout.data.data() +
                                (static_cast<size_t>(y) * dout.width + xx) * dim_,
                            dim_, &dy_all[(static_cast<size_t>(w) * tokens + t) * dim_]);
        }
    }

    std::vector<float> d_attn_out = proj_.backward(dy_all, n_windows * tokens);

    std::vector<float> d_qkv(static_cast<size_t>(n_windows) * tokens * 3 * dim_);
    for (int w = 0; w < n_windows; ++w) {
        WindowCache& cc = caches_[w];
        ConstMapMat q(cc.q.data(), tokens, dim_);
        ConstMapMat k(cc.k.data(), tokens, dim_);
        ConstMapMat v(cc.v.data(), tokens, dim_);
        ConstMapMat a(cc.attn.data(), tokens, tokens);
        ConstMapMat dO(&d_attn_out[static_cast<size_t>(w) * tokens * dim_], tokens, dim_);

        RowMat dA = dO * v.transpose();
        RowMat dV = a.transpose() * dO;
        RowMat dS(tokens, tokens);
        for (int i = 0; i < tokens; ++i) {
            const float dot = a.row(i).dot(dA.row(i));
            dS.row(i) = a.row(i).array() * (dA.row(i).array() - dot);
        }
        RowMat dQ = (dS * k) * scale;
        RowMat dK = (dS.transpose() * q) * scale;
        for (int t = 0; t < tokens; ++t) {
            float* row = &d_qkv[(static_cast<size_t>(w) * tokens + t) * 3 * dim_];
            for (int c = 0; c < dim_; ++c) {
                row[c] = dQ(t, c);
                row[dim_ + c] = dK(t, c);
                row[2 * dim_ + c] = dV(t, c);
            }
        }
    }

    std::vector<float> dx_all = qkv_.backward(d_qkv, n_windows * tokens);

    Tensor din(in_h_, in_w_, dim_);
    for (int w = 0; w < n_windows; ++w) {
        const int oy = (w / wx) * window_, ox = (w % wx) * window_;
        for (int t = 0; t < tokens; ++t) {
            const int y = oy + t / window_, xx = ox + t % window_;
            if (y < in_h_ && xx < in_w_)
                std::copy_n(&dx_all[(static_cast<size_t>(w) * tokens + t) * dim_], dim_,
                            &din.at(y, xx, 0));
        }
    }
    return din;
}

void WindowAttention::collect(ParamRefs& out) {
    qkv_.collect(out);
    proj_.collect(out);
}

// --- Misc -------------------------------------------------------------

Tensor upsample_nearest2x(const Tensor& x) {
    Tensor out(x.height * 2, x.width * 2, x.channels);
    for (int y = 0; y < out.height; ++y)
        for (int xx = 0; xx < out.width; ++xx)
            for (int c = 0; c < x.channels; ++c)
                out.at(y, xx, c) = x.at(y / 2, xx / 2, c);
    return out;
}

Tensor upsample_nearest2x_backward(const Tensor& dout) {
    Tensor din(dout.height / 2, dout.width / 2, dout.channels);
    for (int y = 0; y < dout.height; ++y)
        for (int xx = 0; xx < dout.width; ++xx)
            for (int c = 0; c < dout.channels; ++c)
                din.at(y / 2, xx / 2, c) += dout.at(y, xx, c);
    return din;
}

std::vector<float> sinusoidal_embedding(float t, int dim) {
    std::vector<float> out(dim);
    const int half = dim / 2;
    for (int i = 0; i < half; ++i) {
        const double freq = std::exp(-std::log(10000.0) * i / std::max(1, half - 1));
        out[i] = static_cast<float>(std::sin(t * freq));
        out[half + i] = static_cast<float>(std::cos(t * freq));
    }
    return out;
}

}  // namespace lsrna::nn

#include "lsrna/codec.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace lsrna::codec {

void CodecSpec::validate() const {
    if (s < 1) throw std::invalid_argument("CodecSpec: s must be >= 1");
    if (backend == Backend::InvertibleMock && channels != 3 * s * s)
        throw std::invalid_argument("CodecSpec: invertible mock requires C = 3*s^2");
    if (channels < 1) throw std::invalid_argument("CodecSpec: channels must be >= 1");
}

// --- invertible mock --------------------------------------------------

Codec::Codec(CodecSpec spec) : spec_(spec) {
    spec_.validate();
    if (spec_.backend != Backend::InvertibleMock)
        throw std::invalid_argument("Codec: learned backend needs an autoencoder");
    // Fixed signed permutation: orthonormal channel mixing that is exact
    // in float arithmetic, keyed only on s.
    const int c = spec_.channels;
    perm_.resize(c);
    std::iota(perm_.begin(), perm_.end(), 0);
    sign_.resize(c);
    Rng rng(0xC0DECull + static_cast<uint64_t>(spec_.s));
    for (int i = c - 1; i > 0; --i) std::swap(perm_[i], perm_[rng.uniform_int(i + 1)]);
    for (int i = 0; i < c; ++i) sign_[i] = rng.uniform() < 0.5f ? -1.0f : 1.0f;
}

Codec::Codec(CodecSpec spec, TinyAutoencoder autoencoder)
    : spec_(spec), ae_(std::make_unique<TinyAutoencoder>(std::move(autoencoder))) {
    spec_.validate();
    if (spec_.backend != Backend::LearnedTiny)
        throw std::invalid_argument("Codec: mock backend takes no autoencoder");
    if (ae_->s() != spec_.s || ae_->latent_channels() != spec_.channels)
        throw std::invalid_argument("Codec: autoencoder does not match spec");
}

TinyAutoencoder& Codec::autoencoder() {
    if (!ae_) throw std::runtime_error("Codec: no autoencoder (mock backend)");
    return *ae_;
}

LatentGrid Codec::encode(const RgbImage& image) {
    require_finite(image, "encode input");
    const int s = spec_.s;
    if (image.height % s != 0 || image.width % s != 0)
        throw std::invalid_argument("encode: image size " + image.shape_str() +
                                    " not divisible by s=" + std::to_string(s));
    if (image.channels != 3) throw std::invalid_argument("encode: expected RGB input");

    if (spec_.backend == Backend::LearnedTiny) return ae_->encode(image);

    const int h = image.height / s, w = image.width / s;
    LatentGrid out(h, w, spec_.channels);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            for (int dy = 0; dy < s; ++dy)
                for (int dx = 0; dx < s; ++dx)
                    for (int c = 0; c < 3; ++c) {
                        const int ch = (dy * s + dx) * 3 + c;
                        out.at(y, x, perm_[ch]) =
                            sign_[ch] * image.at(y * s + dy, x * s + dx, c);
                    }
    return out;
}

RgbImage Codec::decode(const LatentGrid& latent) {
    if (latent.channels != spec_.channels)
        throw std::invalid_argument("decode: latent has " +
                                    std::to_string(latent.channels) +
                                    " channels, spec has " +
                                    std::to_string(spec_.channels));
    if (spec_.backend == Backend::LearnedTiny) return ae_->decode(latent);

    const int s = spec_.s;
    RgbImage out(latent.height * s, latent.width * s, 3);
    for (int y = 0; y < latent.height; ++y)
        for (int x = 0; x < latent.width; ++x)
            for (int dy = 0; dy < s; ++dy)
                for (int dx = 0; dx < s; ++dx)
                    for (int c = 0; c < 3; ++c) {
                        const int ch = (dy * s + dx) * 3 + c;
                        out.at(y * s + dy, x * s + dx, c) =
                            sign_[ch] * latent.at(y, x, perm_[ch]);
                    }
    return out;
}

// --- learned tiny -----------------------------------------------------

static int log2_exact(int s) {
    int n = 0, v = s;
    while (v > 1) {
        if (v % 2 != 0) throw std::invalid_argument("TinyAutoencoder: s must be a power of 2");
        v /= 2;
        ++n;
    }
    return n;
}

TinyAutoencoder::TinyAutoencoder(int s, int latent_channels, int width,
                                 uint64_t init_seed)
    : s_(s), latent_channels_(latent_channels), width_(width), n_down_(log2_exact(s)) {
    Rng rng(init_seed);
    int ch = 3;
    for (int i = 0; i < n_down_; ++i) {
        enc_convs_.emplace_back("enc" + std::to_string(i), ch, width, 3, 2, 1, rng);
        ch = width;
    }
    enc_act_.resize(n_down_);
    enc_out_ = nn::Conv2d("enc_out", ch, latent_channels, 3, 1, 1, rng);
    dec_in_ = nn::Conv2d("dec_in", latent_channels, width, 3, 1, 1, rng);
    for (int i = 0; i < n_down_; ++i)
        dec_convs_.emplace_back("dec" + std::to_string(i), width, width, 3, 1, 1, rng);
    dec_act_.resize(n_down_);
    dec_out_ = nn::Conv2d("dec_out", width, 3, 3, 1, 1, rng);
}

LatentGrid TinyAutoencoder::encode(const RgbImage& image) {
    Tensor x = image;
    for (int i = 0; i < n_down_; ++i) x = enc_act_[i].forward(enc_convs_[i].forward(x));
    return enc_out_.forward(x);
}

RgbImage TinyAutoencoder::decode(const LatentGrid& latent) {
    if (latent.channels != latent_channels_)
        throw std::invalid_argument("TinyAutoencoder::decode: channel mismatch");
    Tensor x = dec_in_act_.forward(dec_in_.forward(latent));
    for (int i = 0; i < n_down_; ++i) {
        x = nn::upsample_nearest2x(x);
        x = dec_act_[i].forward(dec_convs_[i].forward(x));
    }
    return dec_sigmoid_.forward(dec_out_.forward(x));
}

RgbImage TinyAutoencoder::forward_train(const RgbImage& image) {
    return decode(encode(image));
}

void TinyAutoencoder::backward(const Tensor& d_recon) {
    Tensor d = dec_sigmoid_.backward(d_recon);
    d = dec_out_.backward(d);
    for (int i = n_down_ - 1; i >= 0; --i) {
        d = dec_convs_[i].backward(dec_act_[i].backward(d));
        d = nn::upsample_nearest2x_backward(d);
    }
    d = dec_in_.backward(dec_in_act_.backward(d));
    d = enc_out_.backward(d);
    for (int i = n_down_ - 1; i >= 0; --i)
        d = enc_convs_[i].backward(enc_act_[i].backward(d));
}

nn::ParamRefs TinyAutoencoder::params() {
    nn::ParamRefs refs;
    for (auto& c : enc_convs_) c.collect(refs);
    enc_out_.collect(refs);
    dec_in_.collect(refs);
    for (auto& c : dec_convs_) c.collect(refs);
    dec_out_.collect(refs);
    return refs;
}

void TinyAutoencoder::save(const std::string& path) const {
    TensorArchive archive;
    Tensor meta(1, 1, 4);
    meta.data = {static_cast<float>(s_), static_cast<float>(latent_channels_),
                 static_cast<float>(width_), val_error};
    archive.put("meta", meta);
    nn::save_params(const_cast<TinyAutoencoder*>(this)->params(), archive);
    archive.save(path);
}

TinyAutoencoder TinyAutoencoder::load(const std::string& path) {
    TensorArchive archive = TensorArchive::load(path);
    const Tensor& meta = archive.get("meta");
    TinyAutoencoder ae(static_cast<int>(meta.data[0]), static_cast<int>(meta.data[1]),
                       static_cast<int>(meta.data[2]), 0);
    ae.val_error = meta.data[3];
    nn::load_params(ae.params(), archive);
    return ae;
}

// --- training ---------------------------------------------------------

TinyAutoencoder train_codec(const std::vector<RgbImage>& images, const CodecSpec& spec,
                            const CodecTrainConfig& cfg, uint64_t seed,
                            std::vector<TrainLogEntry>* log) {
    if (images.empty()) throw std::invalid_argument("train_codec: empty dataset");
    spec.validate();
    TinyAutoencoder ae(spec.s, spec.channels, 24, mix_seed(seed, 1));
    nn::ParamRefs params = ae.params();
    nn::AdamConfig adam_cfg;
    adam_cfg.lr = cfg.lr;
    nn::Adam adam(params, adam_cfg);
    Rng rng(mix_seed(seed, 2));

    // Hold the last image out for validation.
    const size_t n_train = images.size() > 1 ? images.size() - 1 : images.size();

    auto random_crop = [&](const RgbImage& img) {
        const int size = std::min({cfg.image_size, img.height, img.width});
        const int sz = size / spec.s * spec.s;
        const int y0 = img.height > sz ? rng.uniform_int(img.height - sz + 1) : 0;
        const int x0 = img.width > sz ? rng.uniform_int(img.width - sz + 1) : 0;
        return crop(img, y0, x0, sz, sz);
    };

    for (int it = 0; it < cfg.iterations; ++it) {
        nn::zero_grads(params);
        double loss = 0.0;
        for (int b = 0; b < cfg.batch_size; ++b) {
            const RgbImage target = random_crop(images[rng.uniform_int(static_cast<int>(n_train))]);
            const RgbImage recon = ae.forward_train(target);
            Tensor d(recon.height, recon.width, 3);
            const float inv_n = 1.0f / (static_cast<float>(recon.size()) * cfg.batch_size);
            for (size_t i = 0; i < recon.data.size(); ++i) {
                const float diff = recon.data[i] - target.data[i];
                loss += diff * diff * inv_n;
                d.data[i] = 2.0f * diff * inv_n;
            }
            ae.backward(d);
        }
        if (!std::isfinite(loss))
            throw std::runtime_error("train_codec: NaN loss at iteration " +
                                     std::to_string(it));
        const float scale = nn::cosine_lr_scale(it, cfg.iterations);
        adam.step(scale);
        if (log && (it % cfg.log_every == 0 || it + 1 == cfg.iterations))
            log->push_back({it, static_cast<float>(loss), cfg.lr * scale});
    }

    // Validation MAE on the held-out image.
    const RgbImage& val_src = images.back();
    const int vh = val_src.height / spec.s * spec.s;
    const int vw = val_src.width / spec.s * spec.s;
    const RgbImage val = crop(val_src, 0, 0, vh, vw);
    ae.val_error = mean_abs_diff(ae.decode(ae.encode(val)), val);
    return ae;
}

}  // namespace lsrna::codec

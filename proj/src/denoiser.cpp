#include "lsrna/denoiser.hpp"

#include <cmath>
#include <stdexcept>

namespace lsrna::refgen {

void DenoiserConfig::validate() const {
    if (channels < 1 || width < 1 || depth < 1 || n_classes < 1 || time_dim < 2)
        throw std::invalid_argument("DenoiserConfig: invalid dimensions");
}

ToyDenoiser::ToyDenoiser(const DenoiserConfig& config, uint64_t init_seed)
    : config_(config) {
    config_.validate();
    Rng rng(init_seed);
    time_fc1_ = nn::Linear("time.fc1", config_.time_dim, config_.width, rng);
    time_fc2_ = nn::Linear("time.fc2", config_.width, config_.width, rng);
    class_emb_.name = "class_emb";
    class_emb_.resize(static_cast<size_t>(config_.n_classes) * config_.width);
    nn::init_uniform(class_emb_, config_.width, rng);
    conv_in_ = nn::Conv2d("conv_in", config_.channels, config_.width, 3, 1, 1, rng);
    conv_out_ = nn::Conv2d("conv_out", config_.width, config_.channels, 3, 1, 1, rng);
    for (int i = 0; i < config_.depth; ++i) {
        block_convs_.emplace_back("block" + std::to_string(i) + ".conv1", config_.width,
                                  config_.width, 3, 1, 1, rng);
        block_convs_.emplace_back("block" + std::to_string(i) + ".conv2", config_.width,
                                  config_.width, 3, 1, 1, rng);
    }
    block_acts_.resize(config_.depth);
}

Tensor ToyDenoiser::forward(const Tensor& z_t, int t, int label) {
    if (z_t.channels != config_.channels)
        throw std::invalid_argument("ToyDenoiser: channel mismatch");
    if (label < 0 || label >= config_.n_classes)
        throw std::invalid_argument("ToyDenoiser: label out of range");
    cached_label_ = label;

    std::vector<float> emb =
        time_fc1_.forward(nn::sinusoidal_embedding(static_cast<float>(t), config_.time_dim), 1);
    emb = time_act_.forward(emb);
    emb = time_fc2_.forward(emb, 1);
    for (int c = 0; c < config_.width; ++c)
        emb[c] += class_emb_.v[static_cast<size_t>(label) * config_.width + c];
    cached_emb_ = emb;

    Tensor h = conv_in_.forward(z_t);
    for (int i = 0; i < config_.depth; ++i) {
        Tensor r = block_convs_[2 * i].forward(h);
        for (int y = 0; y < r.height; ++y)
            for (int x = 0; x < r.width; ++x)
                for (int c = 0; c < config_.width; ++c) r.at(y, x, c) += emb[c];
        r = block_acts_[i].forward(r);
        r = block_convs_[2 * i + 1].forward(r);
        h = h + r;
    }
    return conv_out_.forward(h);
}

void ToyDenoiser::backward(const Tensor& d_out) {
    Tensor dh = conv_out_.backward(d_out);
    std::vector<float> d_emb(config_.width, 0.0f);
    for (int i = config_.depth - 1; i >= 0; --i) {
        Tensor dr = block_convs_[2 * i + 1].backward(dh);
        dr = block_acts_[i].backward(dr);
        for (int y = 0; y < dr.height; ++y)
            for (int x = 0; x < dr.width; ++x)
                for (int c = 0; c < config_.width; ++c) d_emb[c] += dr.at(y, x, c);
        dh = dh + block_convs_[2 * i].backward(dr);
    }
    conv_in_.backward(dh);

    for (int c = 0; c < config_.width; ++c)
        class_emb_.g[static_cast<size_t>(cached_label_) * config_.width + c] += d_emb[c];
    std::vector<float> d = time_fc2_.backward(d_emb, 1);
    d = time_act_.backward_vec(d);
    time_fc1_.backward(d, 1);
}

nn::ParamRefs ToyDenoiser::params() {
    nn::ParamRefs refs;
    time_fc1_.collect(refs);
    time_fc2_.collect(refs);
    refs.push_back(&class_emb_);
    conv_in_.collect(refs);
    conv_out_.collect(refs);
    for (auto& c : block_convs_) c.collect(refs);
    return refs;
}

void ToyDenoiser::save(const std::string& path) const {
    TensorArchive archive;
    Tensor meta(1, 1, 6);
    meta.data = {static_cast<float>(config_.channels), static_cast<float>(config_.width),
                 static_cast<float>(config_.depth), static_cast<float>(config_.n_classes),
                 static_cast<float>(config_.time_dim),
                 static_cast<float>(trained_iterations)};
    archive.put("meta", meta);
    nn::save_params(const_cast<ToyDenoiser*>(this)->params(), archive);
    archive.save(path);
}

ToyDenoiser ToyDenoiser::load(const std::string& path) {
    TensorArchive archive = TensorArchive::load(path);
    const Tensor& meta = archive.get("meta");
    DenoiserConfig cfg;
    cfg.channels = static_cast<int>(meta.data[0]);
    cfg.width = static_cast<int>(meta.data[1]);
    cfg.depth = static_cast<int>(meta.data[2]);
    cfg.n_classes = static_cast<int>(meta.data[3]);
    cfg.time_dim = static_cast<int>(meta.data[4]);
    ToyDenoiser model(cfg, 0);
    model.trained_iterations = static_cast<int>(meta.data[5]);
    nn::load_params(model.params(), archive);
    return model;
}

ToyDenoiser train_toy_denoiser(const std::vector<LabeledLatent>& dataset,
                               const NoiseSchedule& schedule,
                               const DenoiserConfig& config,
                               const DenoiserTrainConfig& train_cfg, uint64_t seed,
                               std::vector<DenoiserTrainLogEntry>* log) {
    if (dataset.empty()) throw std::invalid_argument("train_toy_denoiser: empty dataset");
    ToyDenoiser model(config, mix_seed(seed, 1));
    nn::ParamRefs params = model.params();
    nn::AdamConfig adam_cfg;
    adam_cfg.lr = train_cfg.lr;
    nn::Adam adam(params, adam_cfg);
    Rng rng(mix_seed(seed, 2));

    for (int it = 0; it < train_cfg.iterations; ++it) {
        nn::zero_grads(params);
        double loss = 0.0;
        for (int b = 0; b < train_cfg.batch_size; ++b) {
            const LabeledLatent& sample = dataset[rng.uniform_int(static_cast<int>(dataset.size()))];
            const int t = 1 + rng.uniform_int(schedule.total_steps);
            const Tensor eps = rng.normal_tensor(sample.latent.height,
                                                 sample.latent.width,
                                                 sample.latent.channels);
            const LatentGrid z_t = forward_noise_with(sample.latent, t, schedule, eps);
            const Tensor pred = model.forward(z_t, t, sample.label);
            Tensor d(pred.height, pred.width, pred.channels);
            const float inv_n = 1.0f / (static_cast<float>(pred.size()) * train_cfg.batch_size);
            for (size_t i = 0; i < pred.data.size(); ++i) {
                const float diff = pred.data[i] - eps.data[i];
                loss += diff * diff * inv_n;
                d.data[i] = 2.0f * diff * inv_n;
            }
            model.backward(d);
        }
        if (!std::isfinite(loss))
            throw std::runtime_error("train_toy_denoiser: NaN loss at iteration " +
                                     std::to_string(it));
        adam.step(nn::cosine_lr_scale(it, train_cfg.iterations));
        if (log && (it % train_cfg.log_every == 0 || it + 1 == train_cfg.iterations))
            log->push_back({it, static_cast<float>(loss)});
    }
    model.trained_iterations = train_cfg.iterations;
    return model;
}

LatentGrid generate_reference(int label, ToyDenoiser& model,
                              const NoiseSchedule& schedule, int steps, int base_h,
                              int base_w, uint64_t seed, float eta) {
    if (model.trained_iterations <= 0)
        throw std::runtime_error("generate_reference: model is untrained");
    Rng rng(mix_seed(seed, 0xEF));
    LatentGrid z = rng.normal_tensor(base_h, base_w, model.config().channels);
    const std::vector<int> ts = ddim_timesteps(schedule.total_steps, steps);
    for (size_t i = 0; i + 1 < ts.size(); ++i) {
        const Tensor eps = model.forward(z, ts[i], label);
        z = ddim_step(z, eps, ts[i], ts[i + 1], schedule, eta, mix_seed(seed, 0x100 + i));
    }
    return z;
}

}  // namespace lsrna::refgen

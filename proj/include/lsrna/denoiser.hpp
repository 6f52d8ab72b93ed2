#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "lsrna/diffusion.hpp"
#include "lsrna/nn.hpp"
#include "lsrna/tensor.hpp"

namespace lsrna::refgen {

struct DenoiserConfig {
    int channels = 4;
    int width = 32;
    int depth = 3;
    int n_classes = 3;
    int time_dim = 32;

    void validate() const;
};

// Small class-conditional epsilon predictor. Convolutional throughout,
// so it runs on any latent size; conditioning enters as a per-channel
// bias inside each residual block.
class ToyDenoiser {
public:
    ToyDenoiser() = default;
    ToyDenoiser(const DenoiserConfig& config, uint64_t init_seed);

    Tensor forward(const Tensor& z_t, int t, int label);
    void backward(const Tensor& d_out);

    nn::ParamRefs params();
    const DenoiserConfig& config() const { return config_; }

    void save(const std::string& path) const;
    static ToyDenoiser load(const std::string& path);

    int trained_iterations = 0;

    // Adapter for the patchwise sampler.
    EpsPredictor as_predictor(int label) {
        return [this, label](const Tensor& z, int t) { return forward(z, t, label); };
    }

private:
    DenoiserConfig config_;
    nn::Linear time_fc1_, time_fc2_;
    nn::ReLU time_act_;
    nn::Param class_emb_;  // [n_classes][width]
    nn::Conv2d conv_in_, conv_out_;
    std::vector<nn::Conv2d> block_convs_;  // 2 per block
    std::vector<nn::ReLU> block_acts_;
    std::vector<float> cached_emb_;
    int cached_label_ = -1;
};

struct LabeledLatent {
    LatentGrid latent;
    int label = 0;
};

struct DenoiserTrainConfig {
    int iterations = 1500;
    int batch_size = 8;
    float lr = 1e-3f;
    int log_every = 50;
};

struct DenoiserTrainLogEntry {
    int iteration;
    float loss;
};

ToyDenoiser train_toy_denoiser(const std::vector<LabeledLatent>& dataset,
                               const NoiseSchedule& schedule,
                               const DenoiserConfig& config,
                               const DenoiserTrainConfig& train_cfg, uint64_t seed,
                               std::vector<DenoiserTrainLogEntry>* log = nullptr);

// Full DDIM trajectory from pure noise at the base latent size.
LatentGrid generate_reference(int label, ToyDenoiser& model,
                              const NoiseSchedule& schedule, int steps, int base_h,
                              int base_w, uint64_t seed, float eta = 0.0f);

}  // namespace lsrna::refgen

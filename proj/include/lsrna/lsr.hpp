#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "lsrna/nn.hpp"
#include "lsrna/rng.hpp"
#include "lsrna/tensor.hpp"

namespace lsrna::lsr {

using FeatureMap = Tensor;

enum class BackboneKind { LightweightAttention, ResidualConv };

struct LsrConfig {
    BackboneKind backbone = BackboneKind::LightweightAttention;
    int depth = 4;          // residual / attention blocks
    int width = 48;         // backbone channels
    int feature_dim = 48;   // C'
    int io_channels = 4;    // latent channels (3 for the RGB-space variant)
    int window = 8;         // attention window
    std::vector<int> mlp_widths = {128, 128, 128};

    void validate() const;
};

// A training query: one HR pixel with its coordinate and cell size.
struct PixelQuery {
    float coord_y, coord_x;  // in [-1, 1]
    float cell_y, cell_x;    // 2/H, 2/W of the target grid
    std::vector<float> target;  // C values (empty at inference)
};

// Coordinate grid for a full target resolution: cell-centered, range
// [-1, 1], symmetric about 0.
std::vector<PixelQuery> make_coord_grid(int target_h, int target_w);

class LsrModel {
public:
    LsrModel() = default;
    LsrModel(const LsrConfig& config, uint64_t init_seed);

    const LsrConfig& config() const { return config_; }
    nn::ParamRefs params();

    FeatureMap extract_features(const LatentGrid& latent);
    Tensor backward_features(const Tensor& d_features);

    // Single-query prediction with local-ensemble interpolation over the
    // 4 nearest feature cells. The full-grid upsample below runs this
    // exact routine per pixel, so the two agree bitwise.
    std::vector<float> query_pixel(const FeatureMap& features, float coord_y,
                                   float coord_x, float cell_y, float cell_x);

    // Batched training path over many queries; returns predictions
    // (count x C row-major) and supports backward into the feature map.
    std::vector<float> query_batch_train(const FeatureMap& features,
                                         const std::vector<PixelQuery>& queries);
    Tensor query_batch_backward(const std::vector<float>& d_pred);

    void save(const std::string& path) const;
    static LsrModel load(const std::string& path);

    // Arbitrary-scale consistency bound recorded by train_lsr: L1 between
    // the input and the bicubic downscale of a x2 upsample, on held-out
    // data, with headroom.
    float consistency_bound = -1.0f;
    float final_val_l1 = -1.0f;

private:
    struct CornerEntry {
        int fy, fx;
        float weight;
        size_t row;  // row in the MLP input buffer
    };

    LsrConfig config_;

    // Backbone (one of the two kinds is active).
    nn::Conv2d embed_, head_;
    std::vector<nn::Conv2d> res_convs_;  // residual-conv: 2 per block
    std::vector<nn::ReLU> res_acts_;
    std::vector<nn::LayerNorm> attn_norms_;  // attention: 2 per block
    std::vector<nn::WindowAttention> attns_;
    std::vector<nn::Linear> attn_mlps_;  // 2 per block
    std::vector<nn::ReLU> attn_mlp_acts_;
    Tensor cached_embed_;
    std::vector<Tensor> cached_block_inputs_;
    int cached_h_ = 0, cached_w_ = 0;

    // LIIF upsampler MLP.
    std::vector<nn::Linear> mlp_layers_;
    std::vector<nn::ReLU> mlp_acts_;

    // Batched-query cache.
    std::vector<CornerEntry> cached_corners_;
    std::vector<float> cached_corner_weight_sums_;
    int cached_query_count_ = 0;
    int cached_feat_h_ = 0, cached_feat_w_ = 0;

    int mlp_in_dim() const { return config_.feature_dim + 4; }
    std::vector<float> mlp_forward(const std::vector<float>& x, int count);
    std::vector<float> mlp_backward(const std::vector<float>& dout, int count);
    void corner_setup(const FeatureMap& features, float coord_y, float coord_x,
                      float cell_y, float cell_x,
                      std::array<CornerEntry, 4>& corners, float& weight_sum,
                      std::array<std::vector<float>, 4>& inputs) const;
};

// --- Module operations -------------------------------------------------

FeatureMap extract_features(const LatentGrid& latent, LsrModel& model);

std::vector<float> query_pixel(const FeatureMap& features, float coord_y, float coord_x,
                               float cell_y, float cell_x, LsrModel& model);

// Arbitrary-scale upsampling by querying every output pixel.
LatentGrid upsample_latent(const LatentGrid& latent, int target_h, int target_w,
                           LsrModel& model);

// Non-parametric baseline (and independent oracle for the learned path).
LatentGrid bicubic_latent_upsample(const LatentGrid& latent, int target_h, int target_w);

struct LsrTrainConfig {
    int iterations = 1000;
    int batch_size = 32;      // paper v1 batch size
    float lr = 2e-4f;         // paper v1 initial lr, cosine annealed
    int lr_crop = 32;         // LR latent crop size fed to the backbone
    int hr_samples = 4096;    // HR pixels sampled per batch element
    int log_every = 50;
};

struct TrainLogEntry {
    int iteration;
    float loss;
    float lr;
};

struct LatentPair {
    LatentGrid lr;
    LatentGrid hr;
    float scale_factor = 0.0f;
    bool augmented = false;  // provenance: must stay false (no flips/rotations)
};

LsrModel train_lsr(const std::vector<LatentPair>& pairs, const LsrConfig& config,
                   const LsrTrainConfig& train_cfg, uint64_t seed,
                   std::vector<TrainLogEntry>* log = nullptr);

}  // namespace lsrna::lsr

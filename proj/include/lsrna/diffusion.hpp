#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "lsrna/rng.hpp"
#include "lsrna/tensor.hpp"

namespace lsrna::refgen {

// Diffusion timestep table: betas plus derived cumulative products.
// alpha_cum(0) == 1 by convention; alpha_cum is strictly decreasing.
struct NoiseSchedule {
    std::vector<float> betas;       // beta_1 .. beta_T
    std::vector<double> alphas_cum; // index 0..T, alphas_cum[0] = 1
    int total_steps = 0;

    static NoiseSchedule linear(int total_steps, float beta_start = 1e-4f,
                                float beta_end = 0.02f);
    double alpha_cum(int t) const;
    void validate() const;
};

enum class UpsampleMode { Lsr, LatentBicubic, RgbBicubic, RgbSr };

UpsampleMode parse_upsample_mode(const std::string& name);
std::string to_string(UpsampleMode mode);

struct GuidanceConfig {
    int t_init = -1;           // -1: derive from target_alpha_cum
    double target_alpha_cum = 0.5;  // pick t_init where alpha_cum crosses this
    int steps = 30;            // reduced DDIM step count T_c
    float eta = 0.0f;
    float blend_exponent = 1.0f;  // cosine-decay exponent for c_t
    UpsampleMode upsample_mode = UpsampleMode::Lsr;

    int resolve_t_init(const NoiseSchedule& schedule) const;
    void validate(const NoiseSchedule& schedule) const;
};

// Overlapping-patch tiling with a per-pixel weight normalization map.
struct PatchPlan {
    int patch_h = 0, patch_w = 0, stride = 0;
    std::vector<std::pair<int, int>> offsets;  // (y, x) of each patch
    Tensor weight_sum;  // H x W x 1, strictly positive, pre-normalization total

    static PatchPlan build(int grid_h, int grid_w, int patch_h, int patch_w, int stride);
};

// Noise predictor signature: (z_patch, t) -> predicted epsilon.
using EpsPredictor = std::function<Tensor(const Tensor&, int)>;

// Closed-form forward marginal: sqrt(acum_t) z0 + sqrt(1 - acum_t) eps.
LatentGrid forward_noise(const LatentGrid& z0, int t, const NoiseSchedule& schedule,
                         uint64_t seed);
LatentGrid forward_noise_with(const LatentGrid& z0, int t, const NoiseSchedule& schedule,
                              const Tensor& eps);

// One DDIM update from t to t_prev. Deterministic when eta == 0.
LatentGrid ddim_step(const LatentGrid& z_t, const LatentGrid& eps_pred, int t,
                     int t_prev, const NoiseSchedule& schedule, float eta,
                     uint64_t seed);

// The x0 estimate the DDIM update is built on; exposed for tests.
LatentGrid ddim_x0_estimate(const LatentGrid& z_t, const LatentGrid& eps_pred, int t,
                            const NoiseSchedule& schedule);

// DDIM eta=1 posterior standard deviation for (t, t_prev).
double ddim_sigma(const NoiseSchedule& schedule, int t, int t_prev, float eta);

// Cosine-decayed guidance blend weight: c_{t_init} = 1, c_0 = 0.
double guidance_blend_weight(int t, int t_init, float exponent);

// z_t <- c_t * forward_noise(guidance, t) + (1 - c_t) * z_t.
LatentGrid inject_guidance(const LatentGrid& z_t, const LatentGrid& guidance, int t,
                           const GuidanceConfig& config, const NoiseSchedule& schedule,
                           uint64_t seed);
LatentGrid inject_guidance_with(const LatentGrid& z_t, const LatentGrid& guidance,
                                int t, const GuidanceConfig& config,
                                const NoiseSchedule& schedule, const Tensor& eps);

// Per-patch predictions blended with normalized weights (partition of
// unity over the whole grid).
LatentGrid patchwise_predict(const LatentGrid& z_t, const EpsPredictor& model,
                             const PatchPlan& plan, int t);

// Uniform-in-t DDIM timestep subsequence from t_start down to 0.
std::vector<int> ddim_timesteps(int t_start, int steps);

}  // namespace lsrna::refgen

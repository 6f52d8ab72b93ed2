#include "lsrna/diffusion.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace lsrna::refgen {

NoiseSchedule NoiseSchedule::linear(int total_steps, float beta_start, float beta_end) {
    if (total_steps < 1)
        throw std::invalid_argument("NoiseSchedule: total_steps must be >= 1");
    NoiseSchedule s;
    s.total_steps = total_steps;
    s.betas.resize(total_steps);
    s.alphas_cum.resize(total_steps + 1);
    s.alphas_cum[0] = 1.0;
    for (int i = 0; i < total_steps; ++i) {
        const float beta =
            total_steps == 1
                ? beta_start
                : beta_start + (beta_end - beta_start) * i / (total_steps - 1.0f);
        s.betas[i] = beta;
        s.alphas_cum[i + 1] = s.alphas_cum[i] * (1.0 - beta);
    }
    s.validate();
    return s;
}

double NoiseSchedule::alpha_cum(int t) const {
    if (t < 0 || t > total_steps)
        throw std::out_of_range("NoiseSchedule: t=" + std::to_string(t) +
                                " outside [0," + std::to_string(total_steps) + "]");
    return alphas_cum[t];
}

void NoiseSchedule::validate() const {
    if (static_cast<int>(betas.size()) != total_steps ||
        static_cast<int>(alphas_cum.size()) != total_steps + 1)
        throw std::invalid_argument("NoiseSchedule: inconsistent sizes");
    if (alphas_cum[0] != 1.0)
        throw std::invalid_argument("NoiseSchedule: alpha_cum(0) must be 1");
    for (int i = 0; i < total_steps; ++i) {
        if (betas[i] <= 0.0f || betas[i] >= 1.0f)
            throw std::invalid_argument("NoiseSchedule: betas must lie in (0,1)");
        if (alphas_cum[i + 1] >= alphas_cum[i])
            throw std::invalid_argument("NoiseSchedule: alpha_cum must strictly decrease");
    }
}

UpsampleMode parse_upsample_mode(const std::string& name) {
    if (name == "lsr") return UpsampleMode::Lsr;
    if (name == "latent-bicubic") return UpsampleMode::LatentBicubic;
    if (name == "rgb-bicubic") return UpsampleMode::RgbBicubic;
    if (name == "rgb-sr") return UpsampleMode::RgbSr;
    throw std::invalid_argument("unknown upsample mode: " + name);
}

std::string to_string(UpsampleMode mode) {
    switch (mode) {
        case UpsampleMode::Lsr: return "lsr";
        case UpsampleMode::LatentBicubic: return "latent-bicubic";
        case UpsampleMode::RgbBicubic: return "rgb-bicubic";
        case UpsampleMode::RgbSr: return "rgb-sr";
    }
    return "?";
}

int GuidanceConfig::resolve_t_init(const NoiseSchedule& schedule) const {
    if (t_init > 0) return t_init;
    // First timestep whose cumulative alpha drops to the configured
    // signal-to-noise target.
    for (int t = 1; t <= schedule.total_steps; ++t)
        if (schedule.alpha_cum(t) <= target_alpha_cum) return t;
    return schedule.total_steps;
}

void GuidanceConfig::validate(const NoiseSchedule& schedule) const {
    const int ti = resolve_t_init(schedule);
    if (ti < 1 || ti > schedule.total_steps)
        throw std::invalid_argument("GuidanceConfig: t_init outside [1,T]");
    if (steps < 1 || steps > schedule.total_steps)
        throw std::invalid_argument("GuidanceConfig: steps outside [1,T]");
    if (eta < 0.0f || eta > 1.0f)
        throw std::invalid_argument("GuidanceConfig: eta outside [0,1]");
}

PatchPlan PatchPlan::build(int grid_h, int grid_w, int patch_h, int patch_w,
                           int stride) {
    if (patch_h < 1 || patch_w < 1 || stride < 1)
        throw std::invalid_argument("PatchPlan: sizes must be positive");
    patch_h = std::min(patch_h, grid_h);
    patch_w = std::min(patch_w, grid_w);
    PatchPlan plan;
    plan.patch_h = patch_h;
    plan.patch_w = patch_w;
    plan.stride = stride;

    auto axis_offsets = [&](int grid, int patch) {
        std::vector<int> offs;
        for (int o = 0;; o += stride) {
            if (o + patch >= grid) {
                offs.push_back(grid - patch);  // clamp last patch to the border
                break;
            }
            offs.push_back(o);
        }
        return offs;
    };
    for (int oy : axis_offsets(grid_h, patch_h))
        for (int ox : axis_offsets(grid_w, patch_w)) plan.offsets.emplace_back(oy, ox);

    plan.weight_sum = Tensor(grid_h, grid_w, 1);
    for (auto [oy, ox] : plan.offsets)
        for (int y = 0; y < patch_h; ++y)
            for (int x = 0; x < patch_w; ++x) plan.weight_sum.at(oy + y, ox + x, 0) += 1.0f;
    for (float v : plan.weight_sum.data)
        if (v <= 0.0f) throw std::runtime_error("PatchPlan: coverage gap");
    return plan;
}

LatentGrid forward_noise_with(const LatentGrid& z0, int t, const NoiseSchedule& schedule,
                              const Tensor& eps) {
    const double acum = schedule.alpha_cum(t);
    if (t == 0) return z0;  // alpha_cum(0) == 1, exact passthrough
    if (!eps.same_shape(z0))
        throw std::invalid_argument("forward_noise: noise shape mismatch");
    const float a = static_cast<float>(std::sqrt(acum));
    const float b = static_cast<float>(std::sqrt(1.0 - acum));
    LatentGrid out = z0;
    for (size_t i = 0; i < out.data.size(); ++i)
        out.data[i] = a * z0.data[i] + b * eps.data[i];
    return out;
}

LatentGrid forward_noise(const LatentGrid& z0, int t, const NoiseSchedule& schedule,
                         uint64_t seed) {
    if (t == 0) {
        schedule.alpha_cum(t);  // range check
        return z0;
    }
    Rng rng(seed);
    return forward_noise_with(z0, t, schedule,
                              rng.normal_tensor(z0.height, z0.width, z0.channels));
}

LatentGrid ddim_x0_estimate(const LatentGrid& z_t, const LatentGrid& eps_pred, int t,
                            const NoiseSchedule& schedule) {
    const double acum = schedule.alpha_cum(t);
    const float inv_sqrt_a = static_cast<float>(1.0 / std::sqrt(acum));
    const float b = static_cast<float>(std::sqrt(1.0 - acum));
    LatentGrid x0 = z_t;
    for (size_t i = 0; i < x0.data.size(); ++i)
        x0.data[i] = (z_t.data[i] - b * eps_pred.data[i]) * inv_sqrt_a;
    return x0;
}

double ddim_sigma(const NoiseSchedule& schedule, int t, int t_prev, float eta) {
    const double a_t = schedule.alpha_cum(t);
    const double a_prev = schedule.alpha_cum(t_prev);
    if (a_t >= 1.0) return 0.0;
    return eta * std::sqrt((1.0 - a_prev) / (1.0 - a_t)) *
           std::sqrt(1.0 - a_t / a_prev);
}

LatentGrid ddim_step(const LatentGrid& z_t, const LatentGrid& eps_pred, int t,
                     int t_prev, const NoiseSchedule& schedule, float eta,
                     uint64_t seed) {
    if (t <= t_prev || t_prev < 0)
        throw std::invalid_argument("ddim_step: need t > t_prev >= 0");
    if (!eps_pred.same_shape(z_t))
        throw std::invalid_argument("ddim_step: eps shape mismatch");
    const double a_prev = schedule.alpha_cum(t_prev);
    const double sigma = ddim_sigma(schedule, t, t_prev, eta);

    const LatentGrid x0 = ddim_x0_estimate(z_t, eps_pred, t, schedule);
    const float sa = static_cast<float>(std::sqrt(a_prev));
    const float dir = static_cast<float>(std::sqrt(std::max(0.0, 1.0 - a_prev - sigma * sigma)));

    LatentGrid out = z_t;
    for (size_t i = 0; i < out.data.size(); ++i)
        out.data[i] = sa * x0.data[i] + dir * eps_pred.data[i];
    if (sigma > 0.0) {
        Rng rng(seed);
        const float s = static_cast<float>(sigma);
        for (float& v : out.data) v += s * rng.normal();
    }
    return out;
}

double guidance_blend_weight(int t, int t_init, float exponent) {
    if (t_init <= 0) throw std::invalid_argument("guidance_blend_weight: t_init must be > 0");
    const double phase = static_cast<double>(t_init - t) / t_init;  // 0 at t_init, 1 at 0
    const double c = 0.5 * (1.0 + std::cos(M_PI * phase));
    return std::pow(c, static_cast<double>(exponent));
}

LatentGrid inject_guidance_with(const LatentGrid& z_t, const LatentGrid& guidance,
                                int t, const GuidanceConfig& config,
                                const NoiseSchedule& schedule, const Tensor& eps) {
    if (!guidance.same_shape(z_t))
        throw std::invalid_argument("inject_guidance: shape mismatch");
    const int t_init = config.resolve_t_init(schedule);
    if (t > t_init)
        throw std::invalid_argument("inject_guidance: t exceeds t_init");
    const double c = guidance_blend_weight(t, t_init, config.blend_exponent);
    if (c == 0.0) return z_t;
    const LatentGrid noised = forward_noise_with(guidance, t, schedule, eps);
    LatentGrid out = z_t;
    const float cf = static_cast<float>(c);
    for (size_t i = 0; i < out.data.size(); ++i)
        out.data[i] = cf * noised.data[i] + (1.0f - cf) * z_t.data[i];
    return out;
}

LatentGrid inject_guidance(const LatentGrid& z_t, const LatentGrid& guidance, int t,
                           const GuidanceConfig& config, const NoiseSchedule& schedule,
                           uint64_t seed) {
    Rng rng(seed);
    return inject_guidance_with(z_t, guidance, t, config, schedule,
                                rng.normal_tensor(z_t.height, z_t.width, z_t.channels));
}

LatentGrid patchwise_predict(const LatentGrid& z_t, const EpsPredictor& model,
                             const PatchPlan& plan, int t) {
    if (plan.weight_sum.height != z_t.height || plan.weight_sum.width != z_t.width)
        throw std::invalid_argument("patchwise_predict: plan does not cover grid");
    LatentGrid acc(z_t.height, z_t.width, z_t.channels);
    for (auto [oy, ox] : plan.offsets) {
        const Tensor patch = crop(z_t, oy, ox, plan.patch_h, plan.patch_w);
        const Tensor pred = model(patch, t);
        if (!pred.same_shape(patch))
            throw std::runtime_error("patchwise_predict: model changed patch shape");
        for (int y = 0; y < plan.patch_h; ++y)
            for (int x = 0; x < plan.patch_w; ++x)
                for (int c = 0; c < z_t.channels; ++c)
                    acc.at(oy + y, ox + x, c) += pred.at(y, x, c);
    }
    for (int y = 0; y < acc.height; ++y)
        for (int x = 0; x < acc.width; ++x) {
            const float inv = 1.0f / plan.weight_sum.at(y, x, 0);
            for (int c = 0; c < acc.channels; ++c) acc.at(y, x, c) *= inv;
        }
    return acc;
}

std::vector<int> ddim_timesteps(int t_start, int steps) {
    if (t_start < 1 || steps < 1)
        throw std::invalid_argument("ddim_timesteps: need t_start, steps >= 1");
    steps = std::min(steps, t_start);
    std::vector<int> ts;
    ts.reserve(steps + 1);
    for (int i = 0; i <= steps; ++i) {
        int t = static_cast<int>(std::lround(t_start * (1.0 - static_cast<double>(i) / steps)));
        if (!ts.empty() && t >= ts.back()) t = ts.back() - 1;
        ts.push_back(std::max(0, t));
    }
    ts.back() = 0;
    return ts;
}

}  // namespace lsrna::refgen

#include "lsrna/pipeline.hpp"

#include <cmath>
#include <stdexcept>

#include "lsrna/resample.hpp"

namespace lsrna::refgen {

LatentGrid upsample_reference(const LatentGrid& reference, int target_h, int target_w,
                              PipelineContext& ctx) {
    switch (ctx.guidance.upsample_mode) {
        case UpsampleMode::Lsr:
            if (!ctx.lsr_model)
                throw std::invalid_argument("upsample_reference: no LSR model");
            return lsr::upsample_latent(reference, target_h, target_w, *ctx.lsr_model);
        case UpsampleMode::LatentBicubic:
            return lsr::bicubic_latent_upsample(reference, target_h, target_w);
        case UpsampleMode::RgbBicubic: {
            const RgbImage lr = ctx.codec->decode(reference);
            const int s = ctx.codec->spec().s;
            const RgbImage hr = clamp01(resize_bicubic(lr, target_h * s, target_w * s));
            return ctx.codec->encode(hr);
        }
        case UpsampleMode::RgbSr: {
            if (!ctx.rgb_sr_model)
                throw std::invalid_argument("upsample_reference: no RGB SR model");
            const RgbImage lr = ctx.codec->decode(reference);
            const int s = ctx.codec->spec().s;
            const RgbImage hr =
                clamp01(lsr::upsample_latent(lr, target_h * s, target_w * s, *ctx.rgb_sr_model));
            return ctx.codec->encode(hr);
        }
    }
    throw std::logic_error("upsample_reference: unknown mode");
}

RgbImage lsrna_generate_from_reference(const LatentGrid& reference, float scale,
                                       PipelineContext& ctx, uint64_t seed) {
    if (scale < 1.0f)
        throw std::invalid_argument("lsrna_generate: scale must be >= 1");
    if (!ctx.codec) throw std::invalid_argument("lsrna_generate: no codec");
    if (!ctx.predictor) throw std::invalid_argument("lsrna_generate: no predictor");
    ctx.guidance.validate(ctx.schedule);
    ctx.rna.validate();

    const int target_h = static_cast<int>(std::lround(reference.height * scale));
    const int target_w = static_cast<int>(std::lround(reference.width * scale));

    // Upsampled guidance plus edge-modulated noise.
    LatentGrid guidance = upsample_reference(reference, target_h, target_w, ctx);
    const RgbImage lr_image = ctx.codec->decode(reference);
    const rna::EdgeMap edges = rna::canny_edges(lr_image, ctx.rna);
    const rna::EdgeDensityMap density = rna::pool_edge_map(edges, target_h, target_w);
    const rna::NoiseScaleMap scales = rna::noise_scale_map(density, ctx.rna);
    guidance = rna::apply_rna(guidance, scales, mix_seed(seed, 0xA1));

    // Partial noising to t_init, then guided patchwise DDIM.
    const int t_init = ctx.guidance.resolve_t_init(ctx.schedule);
    LatentGrid z = forward_noise(guidance, t_init, ctx.schedule, mix_seed(seed, 0xA2));
    const PatchPlan plan = PatchPlan::build(target_h, target_w, ctx.patch_size,
                                            ctx.patch_size, ctx.patch_stride);
    const std::vector<int> ts = ddim_timesteps(t_init, ctx.guidance.steps);
    for (size_t i = 0; i + 1 < ts.size(); ++i) {
        z = inject_guidance(z, guidance, ts[i], ctx.guidance, ctx.schedule,
                            mix_seed(seed, 0xB000 + i));
        const Tensor eps = patchwise_predict(z, ctx.predictor, plan, ts[i]);
        z = ddim_step(z, eps, ts[i], ts[i + 1], ctx.schedule, ctx.guidance.eta,
                      mix_seed(seed, 0xC000 + i));
    }
    return ctx.codec->decode(z);
}

RgbImage lsrna_generate(int label, float scale, ToyDenoiser& model, int base_h,
                        int base_w, PipelineContext& ctx, uint64_t seed) {
    const LatentGrid reference = generate_reference(
        label, model, ctx.schedule, ctx.guidance.steps, base_h, base_w, mix_seed(seed, 0xD0));
    return lsrna_generate_from_reference(reference, scale, ctx, seed);
}

}  // namespace lsrna::refgen

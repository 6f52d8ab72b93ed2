#pragma once

#include <cstdint>

#include "lsrna/codec.hpp"
#include "lsrna/denoiser.hpp"
#include "lsrna/diffusion.hpp"
#include "lsrna/lsr.hpp"
#include "lsrna/rna.hpp"
#include "lsrna/tensor.hpp"

namespace lsrna::refgen {

// Everything the single-shot pipeline needs: codec, upsampler weights,
// noise predictor (pluggable for stubbed tests), schedule and the two
// injection configs.
struct PipelineContext {
    codec::Codec* codec = nullptr;
    lsr::LsrModel* lsr_model = nullptr;      // required for UpsampleMode::Lsr
    lsr::LsrModel* rgb_sr_model = nullptr;   // required for UpsampleMode::RgbSr
    EpsPredictor predictor;
    NoiseSchedule schedule;
    GuidanceConfig guidance;
    rna::RnaConfig rna;
    int patch_size = 16;
    int patch_stride = 8;
};

// Reference upsampling per the configured mode; the rgb modes decode,
// resample in RGB and re-encode.
LatentGrid upsample_reference(const LatentGrid& reference, int target_h, int target_w,
                              PipelineContext& ctx);

// reference -> upsample -> RNA -> partial noising to t_init -> guided
// overlapping-patch DDIM for `steps` steps -> decode. Single shot, no
// progressive stages.
RgbImage lsrna_generate_from_reference(const LatentGrid& reference, float scale,
                                       PipelineContext& ctx, uint64_t seed);

// Convenience wrapper that first samples the base-resolution reference.
RgbImage lsrna_generate(int label, float scale, ToyDenoiser& model, int base_h,
                        int base_w, PipelineContext& ctx, uint64_t seed);

}  // namespace lsrna::refgen

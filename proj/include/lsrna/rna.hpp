#pragma once

#include <cstdint>

#include "lsrna/rng.hpp"
#include "lsrna/tensor.hpp"

namespace lsrna::rna {

// Binary edge map at image resolution (1-channel, values 0 or 1).
using EdgeMap = Tensor;
// Edge density in [0,1] at latent resolution.
using EdgeDensityMap = Tensor;
// Per-cell noise standard deviation, broadcast across latent channels.
using NoiseScaleMap = Tensor;

struct RnaConfig {
    float e_min = 0.0f;
    float e_max = 1.2f;
    // Hysteresis thresholds on raw (un-normalized) Sobel gradient
    // magnitude; magnitudes can exceed 255, so (0, 255) keeps dense weak
    // edges while still requiring strong seeds.
    float canny_low = 0.0f;
    float canny_high = 255.0f;
    float blur_sigma = 1.4f;
    uint64_t rng_seed = 0;

    void validate() const;
};

// Canny pipeline: grayscale -> Gaussian blur -> Sobel -> non-maximum
// suppression -> double threshold -> hysteresis (weak pixels kept only
// when 8-connected to a strong pixel). Gradient magnitude is computed on
// the 0..255 intensity scale.
EdgeMap canny_edges(const RgbImage& image, const RnaConfig& config);

// canny_edges plus the post-NMS gradient magnitudes it thresholded,
// for diagnostics (edge visualization, hysteresis invariant checks).
struct CannyTrace {
    EdgeMap edges;
    Tensor nms_magnitude;
};
CannyTrace canny_edges_traced(const RgbImage& image, const RnaConfig& config);

// Area-weighted average pooling of a binary edge map to the target
// latent grid size. Handles non-integer ratios exactly.
EdgeDensityMap pool_edge_map(const EdgeMap& edges, int target_h, int target_w);

// Affine range map T(v) = e_min + v * (e_max - e_min).
NoiseScaleMap noise_scale_map(const EdgeDensityMap& density, const RnaConfig& config);

// g + T(E) * eps with eps ~ N(0, I) per pixel per channel; the scale is
// one scalar per spatial cell, broadcast across channels.
LatentGrid apply_rna(const LatentGrid& guidance, const NoiseScaleMap& scales,
                     uint64_t seed);

// Deterministic variant with caller-provided noise; test hook and the
// shared implementation path for apply_rna/apply_una.
LatentGrid apply_rna_with_noise(const LatentGrid& guidance, const NoiseScaleMap& scales,
                                const Tensor& eps);

// Uniform Noise Addition: constant scale map of value sigma.
LatentGrid apply_una(const LatentGrid& guidance, float sigma, uint64_t seed);

}  // namespace lsrna::rna

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "lsrna/rna.hpp"
#include "lsrna/tensor.hpp"

namespace lsrna::metrics {

// Deterministic image -> feature-vector map. The default desk backend is
// a fixed-seed random projection with a tanh nonlinearity; the external
// backend reads precomputed features (e.g. Inception) from an archive.
struct EmbedderConfig {
    std::string backend = "fixed-random-projection";
    int input_size = 32;    // images are resized to this square before projection
    int hidden_dim = 192;
    int feature_dim = 48;
    uint64_t seed = 0x5EED;
    std::string feature_file;  // external backend: archive keyed by image name
};

class FeatureEmbedder {
public:
    explicit FeatureEmbedder(const EmbedderConfig& config);

    std::vector<float> embed(const RgbImage& image) const;
    // External backend lookup by image name.
    std::vector<float> embed_named(const RgbImage& image, const std::string& name) const;

    const EmbedderConfig& config() const { return config_; }

private:
    EmbedderConfig config_;
    std::vector<float> w1_, w2_;  // fixed projections
};

// FID sufficient statistics.
struct GaussianMoments {
    std::vector<double> mean;
    std::vector<double> cov;  // d x d row-major, sample covariance (ddof=1)
    int count = 0;
    int dim = 0;
};

GaussianMoments compute_moments(const std::vector<std::vector<float>>& feats);

// ||mu_a - mu_b||^2 + Tr(Sa + Sb - 2 (Sa Sb)^{1/2}); matrix square root
// via eigendecomposition with small negative eigenvalues clamped at 0
// (tolerance 1e-6).
double frechet_distance(const GaussianMoments& a, const GaussianMoments& b);

// Unbiased polynomial-kernel MMD^2, k(x,y) = (x.y/d + 1)^3, averaged
// over blocks. block_size == n gives the direct U-statistic.
double kid_mmd(const std::vector<std::vector<float>>& feats_a,
               const std::vector<std::vector<float>>& feats_b, int block_size);

struct PatchProtocol {
    int patch_size = 64;
    int num_patches = 2000;
    uint64_t seed = 0x9A7C;
};

// Seeded patch locations; depends only on (seed, set size, image sizes).
struct PatchLocation {
    int image_index, y, x;
};
std::vector<PatchLocation> patch_locations(const std::vector<std::pair<int, int>>& sizes,
                                           const PatchProtocol& protocol);

std::vector<RgbImage> extract_aligned_patches(const std::vector<RgbImage>& images,
                                              const PatchProtocol& protocol);

// Center crop to the target aspect ratio, then Lanczos-3 resize.
RgbImage prepare_reference_image(const RgbImage& gt, int target_h, int target_w);

// Per-channel CDF matching of src to ref (256 bins).
RgbImage histogram_match(const RgbImage& src, const RgbImage& ref);

struct RegionDifference {
    double edge_mean = 0.0;     // mean abs difference on edge pixels, 8-bit scale
    double nonedge_mean = 0.0;
    double gap = 0.0;
};

// Histogram-match with_rna to without_rna, then mean absolute pixel
// difference over edge and non-edge regions.
RegionDifference region_difference_report(const RgbImage& with_rna,
                                          const RgbImage& without_rna,
                                          const rna::EdgeMap& edges);

struct MetricReport {
    double fid = 0.0, kid = 0.0, pfid = 0.0, pkid = 0.0;
    std::string config_hash;
    uint64_t patch_seed = 0;
    uint64_t embedder_seed = 0;
    std::string to_json() const;
};

MetricReport evaluate_set(const std::string& generated_dir,
                          const std::string& reference_dir,
                          const FeatureEmbedder& embedder,
                          const PatchProtocol& protocol);

// In-memory variant used by sweeps.
MetricReport evaluate_images(const std::vector<RgbImage>& generated,
                             const std::vector<RgbImage>& reference,
                             const FeatureEmbedder& embedder,
                             const PatchProtocol& protocol);

}  // namespace lsrna::metrics

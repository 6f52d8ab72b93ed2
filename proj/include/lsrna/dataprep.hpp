#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "lsrna/codec.hpp"
#include "lsrna/lsr.hpp"
#include "lsrna/tensor.hpp"

namespace lsrna::dataprep {

struct CropBox {
    int y0 = 0, x0 = 0, size = 0;
};

struct PairRecord {
    LatentGrid lr_latent;
    LatentGrid hr_latent;
    int scale_factor = 0;
    std::string source_id;
    CropBox crop_box;
    // Provenance: both crops were encoded independently from RGB; the
    // pipeline has no path that derives lr_latent from hr_latent.
    bool independently_encoded = true;
    bool augmented = false;
};

struct DataprepConfig {
    int crop_min = 96;
    int crop_max = 160;
    int crop_quantum = 16;
    std::vector<int> factors = {2, 4};
    int min_source_resolution = 96;
    int max_crops_per_image = 0;  // 0: keep all tiles
    uint64_t rng_seed = 0;

    // Quantum must be divisible by lcm(factors) * s so that every
    // downscale and encoding is exact.
    void validate(int codec_s) const;
};

// One random crop size per image; non-overlapping tiling; margins
// discarded. Too-small images produce an empty list.
std::vector<std::pair<RgbImage, CropBox>> harvest_crops(const RgbImage& image,
                                                        const DataprepConfig& config,
                                                        uint64_t seed);

// Exact bicubic downscale by an integer factor.
RgbImage degrade_bicubic(const RgbImage& crop, int factor);

// HR and LR crops encoded separately (never latent-downsampled).
std::vector<PairRecord> build_pair_dataset(const std::vector<RgbImage>& images,
                                           const std::vector<std::string>& source_ids,
                                           codec::Codec& codec,
                                           const DataprepConfig& config);

// Pair-dataset view for the LSR trainer.
std::vector<lsr::LatentPair> to_latent_pairs(const std::vector<PairRecord>& records);

// One training batch per the paper protocol: fixed-size LR latent crops
// with randomly sampled HR pixel targets, no flips or rotations.
struct BatchElement {
    LatentGrid lr_crop;
    std::vector<lsr::PixelQuery> hr_samples;
    bool augmented = false;
};

struct BatchConfig {
    int lr_crop = 32;
    int hr_samples = 4096;
};

std::vector<BatchElement> sample_training_batch(const std::vector<PairRecord>& dataset,
                                                int batch_size, const BatchConfig& cfg,
                                                uint64_t seed);

// Shard + manifest storage.
void save_pair_dataset(const std::vector<PairRecord>& records, const std::string& dir);
std::vector<PairRecord> load_pair_dataset(const std::string& dir);

// Expected tile count for one image at a given crop size.
int expected_tiles(int height, int width, int crop_size);

// Procedural desk dataset: three visually distinct texture classes
// (0: stripes, 1: checker, 2: blobs) with fine-grained detail so patch
// metrics have structure to latch onto. Deterministic in (label, seed).
RgbImage synthesize_desk_image(int label, int size, uint64_t seed);

}  // namespace lsrna::dataprep

#include "lsrna/dataprep.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <stdexcept>

#include <json.hpp>

#include "lsrna/archive.hpp"
#include "lsrna/resample.hpp"
#include "lsrna/rng.hpp"

namespace fs = std::filesystem;

namespace lsrna::dataprep {

static int lcm_of(const std::vector<int>& xs) {
    int l = 1;
    for (int x : xs) l = std::lcm(l, x);
    return l;
}

void DataprepConfig::validate(int codec_s) const {
    if (crop_min < 1 || crop_max < crop_min || crop_quantum < 1)
        throw std::invalid_argument("DataprepConfig: bad crop range");
    if (crop_min % crop_quantum != 0 || crop_max % crop_quantum != 0)
        throw std::invalid_argument("DataprepConfig: crop sizes must be multiples of quantum");
    if (factors.empty()) throw std::invalid_argument("DataprepConfig: empty factor set");
    const int need = lcm_of(factors) * codec_s;
    if (crop_quantum % need != 0)
        throw std::invalid_argument("DataprepConfig: quantum " +
                                    std::to_string(crop_quantum) +
                                    " must be divisible by lcm(factors)*s = " +
                                    std::to_string(need));
}

std::vector<std::pair<RgbImage, CropBox>> harvest_crops(const RgbImage& image,
                                                        const DataprepConfig& config,
                                                        uint64_t seed) {
    if (image.height < config.min_source_resolution ||
        image.width < config.min_source_resolution)
        return {};  // too small; caller logs the warning
    Rng rng(seed);
    const int n_sizes = (config.crop_max - config.crop_min) / config.crop_quantum + 1;
    const int size = config.crop_min + config.crop_quantum * rng.uniform_int(n_sizes);
    std::vector<std::pair<RgbImage, CropBox>> crops;
    for (int y0 = 0; y0 + size <= image.height; y0 += size)
        for (int x0 = 0; x0 + size <= image.width; x0 += size) {
            crops.emplace_back(crop(image, y0, x0, size, size), CropBox{y0, x0, size});
            if (config.max_crops_per_image > 0 &&
                static_cast<int>(crops.size()) >= config.max_crops_per_image)
                return crops;
        }
    return crops;
}

RgbImage degrade_bicubic(const RgbImage& source, int factor) {
    if (factor < 1) throw std::invalid_argument("degrade_bicubic: factor must be >= 1");
    if (factor == 1) return source;
    if (source.height % factor != 0 || source.width % factor != 0)
        throw std::invalid_argument("degrade_bicubic: dimensions not divisible by factor");
    return clamp01(resize_bicubic(source, source.height / factor, source.width / factor));
}

int expected_tiles(int height, int width, int crop_size) {
    return (height / crop_size) * (width / crop_size);
}

std::vector<PairRecord> build_pair_dataset(const std::vector<RgbImage>& images,
                                           const std::vector<std::string>& source_ids,
                                           codec::Codec& codec,
                                           const DataprepConfig& config) {
    if (images.size() != source_ids.size())
        throw std::invalid_argument("build_pair_dataset: id/image count mismatch");
    config.validate(codec.spec().s);
    std::vector<PairRecord> records;
    for (size_t i = 0; i < images.size(); ++i) {
        const uint64_t img_seed = mix_seed(config.rng_seed, i);
        for (auto& [hr_crop, box] : harvest_crops(images[i], config, img_seed)) {
            const LatentGrid hr_latent = codec.encode(hr_crop);
            for (int factor : config.factors) {
                PairRecord rec;
                rec.hr_latent = hr_latent;
                rec.lr_latent = codec.encode(degrade_bicubic(hr_crop, factor));
                rec.scale_factor = factor;
                rec.source_id = source_ids[i];
                rec.crop_box = box;
                records.push_back(std::move(rec));
            }
        }
    }
    return records;
}

std::vector<lsr::LatentPair> to_latent_pairs(const std::vector<PairRecord>& records) {
    std::vector<lsr::LatentPair> pairs;
    pairs.reserve(records.size());
    for (const PairRecord& r : records)
        pairs.push_back({r.lr_latent, r.hr_latent, static_cast<float>(r.scale_factor),
                         r.augmented});
    return pairs;
}

std::vector<BatchElement> sample_training_batch(const std::vector<PairRecord>& dataset,
                                                int batch_size, const BatchConfig& cfg,
                                                uint64_t seed) {
    if (dataset.empty())
        throw std::invalid_argument("sample_training_batch: empty dataset");
    Rng rng(seed);
    std::vector<BatchElement> batch;
    batch.reserve(batch_size);
    int attempts = 0;
    while (static_cast<int>(batch.size()) < batch_size) {
        if (++attempts > 100 * batch_size)
            throw std::runtime_error("sample_training_batch: no record large enough");
        const PairRecord& rec = dataset[rng.uniform_int(static_cast<int>(dataset.size()))];
        if (rec.lr_latent.height < cfg.lr_crop || rec.lr_latent.width < cfg.lr_crop)
            continue;  // too small; resample another record
        const int f = rec.scale_factor;
        const int y0 = rec.lr_latent.height > cfg.lr_crop
                           ? rng.uniform_int(rec.lr_latent.height - cfg.lr_crop + 1)
                           : 0;
        const int x0 = rec.lr_latent.width > cfg.lr_crop
                           ? rng.uniform_int(rec.lr_latent.width - cfg.lr_crop + 1)
                           : 0;
        BatchElement el;
        el.lr_crop = crop(rec.lr_latent, y0, x0, cfg.lr_crop, cfg.lr_crop);
        const int hr_size_y = cfg.lr_crop * f, hr_size_x = cfg.lr_crop * f;
        el.hr_samples.resize(cfg.hr_samples);
        for (auto& q : el.hr_samples) {
            const int hy = rng.uniform_int(hr_size_y);
            const int hx = rng.uniform_int(hr_size_x);
            q.coord_y = -1.0f + (2.0f * hy + 1.0f) / hr_size_y;
            q.coord_x = -1.0f + (2.0f * hx + 1.0f) / hr_size_x;
            q.cell_y = 2.0f / hr_size_y;
            q.cell_x = 2.0f / hr_size_x;
            q.target.resize(rec.hr_latent.channels);
            for (int c = 0; c < rec.hr_latent.channels; ++c)
                q.target[c] = rec.hr_latent.at(y0 * f + hy, x0 * f + hx, c);
        }
        batch.push_back(std::move(el));
    }
    return batch;
}

void save_pair_dataset(const std::vector<PairRecord>& records, const std::string& dir) {
    fs::create_directories(dir);
    nlohmann::json manifest = nlohmann::json::array();
    for (size_t i = 0; i < records.size(); ++i) {
        const PairRecord& r = records[i];
        const std::string shard = "pair_" + std::to_string(i) + ".lta";
        TensorArchive archive;
        archive.put("lr", r.lr_latent);
        archive.put("hr", r.hr_latent);
        archive.save(dir + "/" + shard);
        manifest.push_back({{"shard", shard},
                            {"source_id", r.source_id},
                            {"factor", r.scale_factor},
                            {"crop", {r.crop_box.y0, r.crop_box.x0, r.crop_box.size}},
                            {"independently_encoded", r.independently_encoded},
                            {"augmented", r.augmented}});
    }
    std::ofstream f(dir + "/manifest.json");
    f << manifest.dump(2) << "\n";
}

std::vector<PairRecord> load_pair_dataset(const std::string& dir) {
    std::ifstream f(dir + "/manifest.json");
    if (!f) throw std::runtime_error("load_pair_dataset: no manifest in " + dir);
    nlohmann::json manifest;
    f >> manifest;
    std::vector<PairRecord> records;
    for (const auto& entry : manifest) {
        TensorArchive archive = TensorArchive::load(dir + "/" + entry.at("shard").get<std::string>());
        PairRecord r;
        r.lr_latent = archive.get("lr");
        r.hr_latent = archive.get("hr");
        r.scale_factor = entry.at("factor");
        r.source_id = entry.at("source_id");
        r.crop_box = {entry.at("crop")[0], entry.at("crop")[1], entry.at("crop")[2]};
        r.independently_encoded = entry.at("independently_encoded");
        r.augmented = entry.at("augmented");
        records.push_back(std::move(r));
    }
    return records;
}

RgbImage synthesize_desk_image(int label, int size, uint64_t seed) {
    if (label < 0 || label > 2) throw std::invalid_argument("synthesize_desk_image: label must be 0..2");
    Rng rng(mix_seed(seed, 0x5D5Cu + static_cast<uint64_t>(label)));
    RgbImage img(size, size, 3);

    auto urange = [&rng](float lo, float hi) { return lo + rng.uniform() * (hi - lo); };
    const float phase = urange(0.0f, 6.2831853f);
    const float freq = urange(0.35f, 0.6f);
    const float tilt = urange(-0.25f, 0.25f);
    float base[3] = {urange(0.25f, 0.75f), urange(0.25f, 0.75f), urange(0.25f, 0.75f)};

    // Blob centers for class 2.
    std::vector<std::array<float, 3>> blobs;
    for (int i = 0; i < 14; ++i) {
        blobs.push_back({urange(0.0f, static_cast<float>(size)),
                         urange(0.0f, static_cast<float>(size)),
                         urange(size / 24.0f, size / 8.0f)});
    }

    for (int y = 0; y < size; ++y) {
        for (int x = 0; x < size; ++x) {
            float v = 0.0f;
            switch (label) {
                case 0:  // tilted stripes
                    v = 0.5f + 0.5f * std::sin(freq * (x + tilt * y) + phase);
                    break;
                case 1: {  // checker
                    int cell = size / 16;
                    if (cell < 2) cell = 2;
                    v = (((y / cell) + (x / cell)) % 2 == 0) ? 0.85f : 0.15f;
                    break;
                }
                case 2: {  // soft blobs
                    float acc = 0.0f;
                    for (const auto& b : blobs) {
                        float dy = y - b[0], dx = x - b[1];
                        acc += std::exp(-(dy * dy + dx * dx) / (2.0f * b[2] * b[2]));
                    }
                    v = std::min(1.0f, acc);
                    break;
                }
            }
            // Fine-grained texture at two scales so detail survives crops.
            // Frequencies stay below half of Nyquist so the texture is
            // still representable after a x2 bicubic downscale.
            float tex = 0.08f * std::sin(1.25f * x + 0.55f * y + phase) +
                        0.05f * std::sin(0.45f * x - 1.05f * y);
            for (int c = 0; c < 3; ++c) {
                float mixed = base[c] * 0.4f + v * 0.6f + tex * (c == 1 ? 1.0f : 0.7f);
                img.at(y, x, c) = std::clamp(mixed, 0.0f, 1.0f);
            }
        }
    }
    // Per-pixel grain, deterministic and independent of scan order above.
    Rng grain(mix_seed(seed, 0x6123u));
    for (float& f : img.data) f = std::clamp(f + 0.008f * grain.normal(), 0.0f, 1.0f);
    return img;
}

}  // namespace lsrna::dataprep

#include "lsrna/metrics.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <numeric>

#include <json.hpp>

#include "lsrna/archive.hpp"
#include "lsrna/image_io.hpp"
#include "lsrna/resample.hpp"
#include "lsrna/rng.hpp"

namespace fs = std::filesystem;

namespace lsrna::metrics {

FeatureEmbedder::FeatureEmbedder(const EmbedderConfig& config) : config_(config) {
    if (config_.backend == "fixed-random-projection") {
        const int in_dim = config_.input_size * config_.input_size * 3;
        Rng rng(config_.seed);
        w1_.resize(static_cast<size_t>(config_.hidden_dim) * in_dim);
        const float s1 = 1.0f / std::sqrt(static_cast<float>(in_dim));
        for (float& v : w1_) v = rng.normal() * s1;
        w2_.resize(static_cast<size_t>(config_.feature_dim) * config_.hidden_dim);
        const float s2 = 1.0f / std::sqrt(static_cast<float>(config_.hidden_dim));
        for (float& v : w2_) v = rng.normal() * s2;
    } else if (config_.backend != "external-feature-files") {
        throw std::invalid_argument("FeatureEmbedder: unknown backend " + config_.backend);
    }
}

std::vector<float> FeatureEmbedder::embed(const RgbImage& image) const {
    if (config_.backend != "fixed-random-projection")
        throw std::runtime_error("FeatureEmbedder: external backend needs embed_named");
    const RgbImage r = resize_bicubic(image, config_.input_size, config_.input_size);
    const int in_dim = config_.input_size * config_.input_size * 3;

    std::vector<float> h(config_.hidden_dim, 0.0f);
    for (int o = 0; o < config_.hidden_dim; ++o) {
        double acc = 0.0;
        const float* w = &w1_[static_cast<size_t>(o) * in_dim];
        for (int i = 0; i < in_dim; ++i) acc += w[i] * (r.data[i] - 0.5f);
        h[o] = std::tanh(static_cast<float>(acc) * 4.0f);
    }
    std::vector<float> out(config_.feature_dim, 0.0f);
    for (int o = 0; o < config_.feature_dim; ++o) {
        double acc = 0.0;
        const float* w = &w2_[static_cast<size_t>(o) * config_.hidden_dim];
        for (int i = 0; i < config_.hidden_dim; ++i) acc += w[i] * h[i];
        out[o] = static_cast<float>(acc);
    }
    return out;
}

std::vector<float> FeatureEmbedder::embed_named(const RgbImage& image,
                                                const std::string& name) const {
    if (config_.backend == "fixed-random-projection") return embed(image);
    TensorArchive archive = TensorArchive::load(config_.feature_file);
    const Tensor& t = archive.get(name);
    return t.data;
}

GaussianMoments compute_moments(const std::vector<std::vector<float>>& feats) {
    if (feats.size() < 2)
        throw std::invalid_argument("compute_moments: need at least 2 samples");
    const int n = static_cast<int>(feats.size());
    const int d = static_cast<int>(feats[0].size());
    GaussianMoments m;
    m.count = n;
    m.dim = d;
    m.mean.assign(d, 0.0);
    for (const auto& f : feats)
        for (int i = 0; i < d; ++i) m.mean[i] += f[i];
    for (double& v : m.mean) v /= n;
    m.cov.assign(static_cast<size_t>(d) * d, 0.0);
    for (const auto& f : feats)
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j)
                m.cov[static_cast<size_t>(i) * d + j] +=
                    (f[i] - m.mean[i]) * (f[j] - m.mean[j]);
    for (double& v : m.cov) v /= (n - 1);
    return m;
}

namespace {

Eigen::MatrixXd psd_sqrt(const Eigen::MatrixXd& m, double clamp_tol) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
    if (es.info() != Eigen::Success)
        throw std::runtime_error("frechet_distance: matrix sqrt failed to converge");
    Eigen::VectorXd ev = es.eigenvalues();
    for (int i = 0; i < ev.size(); ++i) {
        if (ev[i] < -clamp_tol * std::max(1.0, std::abs(ev.maxCoeff())))
            throw std::runtime_error("frechet_distance: covariance not PSD");
        ev[i] = std::sqrt(std::max(0.0, ev[i]));
    }
    return es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose();
}

}  // namespace

double frechet_distance(const GaussianMoments& a, const GaussianMoments& b) {
    if (a.dim != b.dim)
        throw std::invalid_argument("frechet_distance: dimension mismatch");
    const int d = a.dim;
    using M = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic,
                                             Eigen::RowMajor>>;
    M sa(a.cov.data(), d, d), sb(b.cov.data(), d, d);

    double mean_term = 0.0;
    for (int i = 0; i < d; ++i) {
        const double diff = a.mean[i] - b.mean[i];
        mean_term += diff * diff;
    }

    // sqrt(Sa Sb) has the same trace as sqrt(sqrt(Sa) Sb sqrt(Sa)),
    // which is symmetric PSD and numerically well behaved.
    const Eigen::MatrixXd sqrt_a = psd_sqrt(sa, 1e-6);
    const Eigen::MatrixXd inner = sqrt_a * sb * sqrt_a;
    const Eigen::MatrixXd sqrt_inner = psd_sqrt((inner + inner.transpose()) / 2.0, 1e-6);

    const double trace_term = sa.trace() + sb.trace() - 2.0 * sqrt_inner.trace();
    return mean_term + trace_term;
}

namespace {

double poly_kernel(const std::vector<float>& x, const std::vector<float>& y) {
    double dot = 0.0;
    for (size_t i = 0; i < x.size(); ++i) dot += static_cast<double>(x[i]) * y[i];
    const double v = dot / x.size() + 1.0;
    return v * v * v;
}

double mmd2_unbiased(const std::vector<const std::vector<float>*>& a,
                     const std::vector<const std::vector<float>*>& b) {
    const int m = static_cast<int>(a.size());
    const int n = static_cast<int>(b.size());
    double kaa = 0.0, kbb = 0.0, kab = 0.0;
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j)
            if (i != j) kaa += poly_kernel(*a[i], *a[j]);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            if (i != j) kbb += poly_kernel(*b[i], *b[j]);
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < n; ++j) kab += poly_kernel(*a[i], *b[j]);
    return kaa / (static_cast<double>(m) * (m - 1)) +
           kbb / (static_cast<double>(n) * (n - 1)) - 2.0 * kab / (static_cast<double>(m) * n);
}

}  // namespace

double kid_mmd(const std::vector<std::vector<float>>& feats_a,
               const std::vector<std::vector<float>>& feats_b, int block_size) {
    if (feats_a.size() < 2 || feats_b.size() < 2)
        throw std::invalid_argument("kid_mmd: need at least 2 samples per set");
    const int n = static_cast<int>(std::min(feats_a.size(), feats_b.size()));
    block_size = std::clamp(block_size, 2, n);
    const int n_blocks = n / block_size;
    double acc = 0.0;
    for (int blk = 0; blk < n_blocks; ++blk) {
        std::vector<const std::vector<float>*> a, b;
        for (int i = blk * block_size; i < (blk + 1) * block_size; ++i) {
            a.push_back(&feats_a[i]);
            b.push_back(&feats_b[i]);
        }
        acc += mmd2_unbiased(a, b);
    }
    return acc / n_blocks;
}

std::vector<PatchLocation> patch_locations(const std::vector<std::pair<int, int>>& sizes,
                                           const PatchProtocol& protocol) {
    if (sizes.empty()) throw std::invalid_argument("patch_locations: empty set");
    std::vector<PatchLocation> locs;
    locs.reserve(protocol.num_patches);
    for (int i = 0; i < protocol.num_patches; ++i) {
        Rng rng(mix_seed(protocol.seed, i));
        const int idx = rng.uniform_int(static_cast<int>(sizes.size()));
        const auto [h, w] = sizes[idx];
        if (h < protocol.patch_size || w < protocol.patch_size)
            throw std::invalid_argument("patch_locations: image smaller than patch");
        locs.push_back({idx,
                        rng.uniform_int(h - protocol.patch_size + 1),
                        rng.uniform_int(w - protocol.patch_size + 1)});
    }
    return locs;
}

std::vector<RgbImage> extract_aligned_patches(const std::vector<RgbImage>& images,
                                              const PatchProtocol& protocol) {
    std::vector<std::pair<int, int>> sizes;
    for (const auto& img : images) sizes.emplace_back(img.height, img.width);
    std::vector<RgbImage> patches;
    for (const PatchLocation& loc : patch_locations(sizes, protocol))
        patches.push_back(crop(images[loc.image_index], loc.y, loc.x,
                               protocol.patch_size, protocol.patch_size));
    return patches;
}

RgbImage prepare_reference_image(const RgbImage& gt, int target_h, int target_w) {
    if (target_h < 1 || target_w < 1)
        throw std::invalid_argument("prepare_reference_image: bad target");
    // Center crop to the target aspect ratio.
    int crop_w = gt.width, crop_h = gt.height;
    if (static_cast<int64_t>(gt.width) * target_h > static_cast<int64_t>(gt.height) * target_w)
        crop_w = std::max(1, gt.height * target_w / target_h);
    else
        crop_h = std::max(1, gt.width * target_h / target_w);
    if (crop_h < target_h || crop_w < target_w)
        throw std::invalid_argument("prepare_reference_image: ground truth smaller than target");
    const RgbImage cropped =
        crop(gt, (gt.height - crop_h) / 2, (gt.width - crop_w) / 2, crop_h, crop_w);
    if (crop_h == target_h && crop_w == target_w) return cropped;
    return clamp01(resize_lanczos3(cropped, target_h, target_w));
}

RgbImage histogram_match(const RgbImage& src, const RgbImage& ref) {
    if (src.channels != ref.channels)
        throw std::invalid_argument("histogram_match: channel count mismatch");
    constexpr int kBins = 256;
    RgbImage out = src;
    const int n_src = src.height * src.width;
    const int n_ref = ref.height * ref.width;
    for (int c = 0; c < src.channels; ++c) {
        std::array<double, kBins> cdf_src{}, cdf_ref{};
        for (int i = 0; i < n_src; ++i)
            cdf_src[std::clamp(static_cast<int>(src.data[static_cast<size_t>(i) * src.channels + c] * 255.0f + 0.5f), 0, 255)] += 1.0;
        for (int i = 0; i < n_ref; ++i)
            cdf_ref[std::clamp(static_cast<int>(ref.data[static_cast<size_t>(i) * ref.channels + c] * 255.0f + 0.5f), 0, 255)] += 1.0;
        for (int b = 1; b < kBins; ++b) {
            cdf_src[b] += cdf_src[b - 1];
            cdf_ref[b] += cdf_ref[b - 1];
        }
        for (double& v : cdf_src) v /= n_src;
        for (double& v : cdf_ref) v /= n_ref;

        // Monotone lookup: smallest ref bin whose CDF reaches the src CDF.
        std::array<uint8_t, kBins> lut{};
        int j = 0;
        for (int b = 0; b < kBins; ++b) {
            while (j < kBins - 1 && cdf_ref[j] < cdf_src[b]) ++j;
            lut[b] = static_cast<uint8_t>(j);
        }
        for (int i = 0; i < n_src; ++i) {
            float& v = out.data[static_cast<size_t>(i) * src.channels + c];
            const int bin = std::clamp(static_cast<int>(v * 255.0f + 0.5f), 0, 255);
            v = lut[bin] / 255.0f;
        }
    }
    return out;
}

RegionDifference region_difference_report(const RgbImage& with_rna,
                                          const RgbImage& without_rna,
                                          const rna::EdgeMap& edges) {
    if (!with_rna.same_shape(without_rna))
        throw std::invalid_argument("region_difference_report: size mismatch");
    if (edges.height != with_rna.height || edges.width != with_rna.width)
        throw std::invalid_argument("region_difference_report: edge map size mismatch");
    const RgbImage matched = histogram_match(with_rna, without_rna);
    double edge_sum = 0.0, nonedge_sum = 0.0;
    int64_t edge_n = 0, nonedge_n = 0;
    for (int y = 0; y < matched.height; ++y)
        for (int x = 0; x < matched.width; ++x) {
            double d = 0.0;
            for (int c = 0; c < matched.channels; ++c)
                d += std::fabs(matched.at(y, x, c) - without_rna.at(y, x, c));
            d = d / matched.channels * 255.0;  // report on the 8-bit scale
            if (edges.at(y, x, 0) > 0.5f) {
                edge_sum += d;
                ++edge_n;
            } else {
                nonedge_sum += d;
                ++nonedge_n;
            }
        }
    RegionDifference r;
    r.edge_mean = edge_n > 0 ? edge_sum / edge_n : 0.0;
    r.nonedge_mean = nonedge_n > 0 ? nonedge_sum / nonedge_n : 0.0;
    r.gap = r.edge_mean - r.nonedge_mean;
    return r;
}

std::string MetricReport::to_json() const {
    nlohmann::json j = {{"fid", fid},
                        {"kid", kid},
                        {"pfid", pfid},
                        {"pkid", pkid},
                        {"config_hash", config_hash},
                        {"patch_seed", patch_seed},
                        {"embedder_seed", embedder_seed}};
    return j.dump(2);
}

MetricReport evaluate_images(const std::vector<RgbImage>& generated,
                             const std::vector<RgbImage>& reference,
                             const FeatureEmbedder& embedder,
                             const PatchProtocol& protocol) {
    if (generated.empty() || reference.empty())
        throw std::invalid_argument("evaluate_images: empty image set");

    // Reference images are cropped/resized to the generated resolution.
    const int th = generated[0].height, tw = generated[0].width;
    std::vector<RgbImage> prepared;
    prepared.reserve(reference.size());
    for (const auto& gt : reference) prepared.push_back(prepare_reference_image(gt, th, tw));

    auto embed_all = [&](const std::vector<RgbImage>& imgs) {
        std::vector<std::vector<float>> feats;
        feats.reserve(imgs.size());
        for (const auto& img : imgs) feats.push_back(embedder.embed(img));
        return feats;
    };

    const auto feats_gen = embed_all(generated);
    const auto feats_ref = embed_all(prepared);

    MetricReport report;
    report.fid = frechet_distance(compute_moments(feats_gen), compute_moments(feats_ref));
    const int n = static_cast<int>(std::min(feats_gen.size(), feats_ref.size()));
    report.kid = kid_mmd(feats_gen, feats_ref, std::max(2, n / 10));

    const auto patches_gen = extract_aligned_patches(generated, protocol);
    const auto patches_ref = extract_aligned_patches(prepared, protocol);
    const auto pf_gen = embed_all(patches_gen);
    const auto pf_ref = embed_all(patches_ref);
    report.pfid = frechet_distance(compute_moments(pf_gen), compute_moments(pf_ref));
    const int np = static_cast<int>(std::min(pf_gen.size(), pf_ref.size()));
    report.pkid = kid_mmd(pf_gen, pf_ref, std::max(2, np / 10));

    report.patch_seed = protocol.seed;
    report.embedder_seed = embedder.config().seed;
    return report;
}

MetricReport evaluate_set(const std::string& generated_dir,
                          const std::string& reference_dir,
                          const FeatureEmbedder& embedder,
                          const PatchProtocol& protocol) {
    auto load_dir = [](const std::string& dir) {
        std::vector<std::string> names;
        for (const auto& entry : fs::directory_iterator(dir))
            if (entry.path().extension() == ".png") names.push_back(entry.path().string());
        std::sort(names.begin(), names.end());
        std::vector<RgbImage> images;
        for (const auto& name : names) images.push_back(read_png(name));
        return images;
    };
    const auto generated = load_dir(generated_dir);
    const auto reference = load_dir(reference_dir);
    if (generated.empty() || reference.empty())
        throw std::runtime_error("evaluate_set: no PNG files found");
    return evaluate_images(generated, reference, embedder, protocol);
}

}  // namespace lsrna::metrics

#include "lsrna/lsr.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "lsrna/resample.hpp"

namespace lsrna::lsr {

void LsrConfig::validate() const {
    if (depth < 1 || width < 1 || feature_dim < 1 || io_channels < 1 || window < 1)
        throw std::invalid_argument("LsrConfig: all dims must be >= 1");
    if (mlp_widths.empty())
        throw std::invalid_argument("LsrConfig: mlp_widths must be non-empty");
}

std::vector<PixelQuery> make_coord_grid(int target_h, int target_w) {
    std::vector<PixelQuery> grid;
    grid.reserve(static_cast<size_t>(target_h) * target_w);
    const float cell_y = 2.0f / target_h, cell_x = 2.0f / target_w;
    for (int y = 0; y < target_h; ++y)
        for (int x = 0; x < target_w; ++x)
            grid.push_back({-1.0f + (2.0f * y + 1.0f) / target_h,
                            -1.0f + (2.0f * x + 1.0f) / target_w, cell_y, cell_x,
                            {}});
    return grid;
}

LsrModel::LsrModel(const LsrConfig& config, uint64_t init_seed) : config_(config) {
    config_.validate();
    Rng rng(init_seed);
    embed_ = nn::Conv2d("embed", config_.io_channels, config_.width, 3, 1, 1, rng);
    head_ = nn::Conv2d("head", config_.width, config_.feature_dim, 3, 1, 1, rng);
    if (config_.backbone == BackboneKind::ResidualConv) {
        for (int i = 0; i < config_.depth; ++i) {
            res_convs_.emplace_back("block" + std::to_string(i) + ".conv1", config_.width,
                                    config_.width, 3, 1, 1, rng);
            res_convs_.emplace_back("block" + std::to_string(i) + ".conv2", config_.width,
                                    config_.width, 3, 1, 1, rng);
        }
        res_acts_.resize(config_.depth);
    } else {
        for (int i = 0; i < config_.depth; ++i) {
            const std::string b = "block" + std::to_string(i);
            attn_norms_.emplace_back(b + ".norm1", config_.width);
            attn_norms_.emplace_back(b + ".norm2", config_.width);
            attns_.emplace_back(b + ".attn", config_.width, config_.window, rng);
            attn_mlps_.emplace_back(b + ".mlp1", config_.width, 2 * config_.width, rng);
            attn_mlps_.emplace_back(b + ".mlp2", 2 * config_.width, config_.width, rng);
        }
        attn_mlp_acts_.resize(config_.depth);
    }
    int in_dim = mlp_in_dim();
    int li = 0;
    for (int w : config_.mlp_widths) {
        mlp_layers_.emplace_back("liif.fc" + std::to_string(li++), in_dim, w, rng);
        in_dim = w;
    }
    mlp_layers_.emplace_back("liif.fc" + std::to_string(li), in_dim, config_.io_channels,
                             rng);
    mlp_acts_.resize(mlp_layers_.size() - 1);
}

nn::ParamRefs LsrModel::params() {
    nn::ParamRefs refs;
    embed_.collect(refs);
    head_.collect(refs);
    for (auto& c : res_convs_) c.collect(refs);
    for (auto& n : attn_norms_) n.collect(refs);
    for (auto& a : attns_) a.collect(refs);
    for (auto& l : attn_mlps_) l.collect(refs);
    for (auto& l : mlp_layers_) l.collect(refs);
    return refs;
}

FeatureMap LsrModel::extract_features(const LatentGrid& latent) {
    if (latent.channels != config_.io_channels)
        throw std::invalid_argument("extract_features: latent has " +
                                    std::to_string(latent.channels) +
                                    " channels, expected " +
                                    std::to_string(config_.io_channels));
    cached_h_ = latent.height;
    cached_w_ = latent.width;
    Tensor x0 = embed_.forward(latent);
    cached_embed_ = x0;
    Tensor b = x0;
    if (config_.backbone == BackboneKind::ResidualConv) {
        for (int i = 0; i < config_.depth; ++i) {
            Tensor r = res_convs_[2 * i].forward(b);
            r = res_acts_[i].forward(r);
            r = res_convs_[2 * i + 1].forward(r);
            b = b + r;
        }
    } else {
        const int n = latent.height * latent.width;
        for (int i = 0; i < config_.depth; ++i) {
            Tensor a = attns_[i].forward(attn_norms_[2 * i].forward(b));
            b = b + a;
            Tensor m = attn_norms_[2 * i + 1].forward(b);
            std::vector<float> v = attn_mlps_[2 * i].forward(m.data, n);
            v = attn_mlp_acts_[i].forward(v);
            v = attn_mlps_[2 * i + 1].forward(v, n);
            Tensor mo(latent.height, latent.width, config_.width);
            mo.data = std::move(v);
            b = b + mo;
        }
    }
    return head_.forward(b + x0);
}

Tensor LsrModel::backward_features(const Tensor& d_features) {
    Tensor db = head_.backward(d_features);
    Tensor dx0 = db;  // global residual
    if (config_.backbone == BackboneKind::ResidualConv) {
        for (int i = config_.depth - 1; i >= 0; --i) {
            Tensor dr = res_convs_[2 * i + 1].backward(db);
            dr = res_acts_[i].backward(dr);
            dr = res_convs_[2 * i].backward(dr);
            db = db + dr;
        }
    } else {
        const int n = cached_h_ * cached_w_;
        for (int i = config_.depth - 1; i >= 0; --i) {
            std::vector<float> dv = attn_mlps_[2 * i + 1].backward(db.data, n);
            dv = attn_mlp_acts_[i].backward_vec(dv);
            dv = attn_mlps_[2 * i].backward(dv, n);
            Tensor dm(cached_h_, cached_w_, config_.width);
            dm.data = std::move(dv);
            db = db + attn_norms_[2 * i + 1].backward(dm);
            Tensor da = attns_[i].backward(db);
            db = db + attn_norms_[2 * i].backward(da);
        }
    }
    return embed_.backward(db + dx0);
}

// Local-ensemble corner setup shared by the single-query and batched
// paths. Weight of each corner is the area spanned to the diagonally
// opposite corner; ties at exact cell boundaries go to the lower index.
void LsrModel::corner_setup(const FeatureMap& features, float coord_y, float coord_x,
                            float cell_y, float cell_x,
                            std::array<CornerEntry, 4>& corners, float& weight_sum,
                            std::array<std::vector<float>, 4>& inputs) const {
    const int h = features.height, w = features.width;
    const float fy = (coord_y + 1.0f) * 0.5f * h - 0.5f;
    const float fx = (coord_x + 1.0f) * 0.5f * w - 0.5f;
    const int iy0 = static_cast<int>(std::floor(fy));
    const int ix0 = static_cast<int>(std::floor(fx));

    std::array<float, 4> areas{};
    for (int k = 0; k < 4; ++k) {
        const int iy = std::clamp(iy0 + (k >> 1), 0, h - 1);
        const int ix = std::clamp(ix0 + (k & 1), 0, w - 1);
        const float cy = -1.0f + (2.0f * iy + 1.0f) / h;
        const float cx = -1.0f + (2.0f * ix + 1.0f) / w;
        const float rel_y = (coord_y - cy) * h;
        const float rel_x = (coord_x - cx) * w;
        areas[k] = std::fabs(rel_y * rel_x);
        corners[k].fy = iy;
        corners[k].fx = ix;
        auto& in = inputs[k];
        in.resize(mlp_in_dim());
        for (int c = 0; c < config_.feature_dim; ++c) in[c] = features.at(iy, ix, c);
        in[config_.feature_dim + 0] = rel_y;
        in[config_.feature_dim + 1] = rel_x;
        in[config_.feature_dim + 2] = cell_y * h;
        in[config_.feature_dim + 3] = cell_x * w;
    }
    weight_sum = 0.0f;
    for (int k = 0; k < 4; ++k) {
        corners[k].weight = areas[3 - k];  // diagonally opposite area
        weight_sum += corners[k].weight;
    }
    if (weight_sum <= 0.0f) {
        for (auto& c : corners) c.weight = 0.25f;
        weight_sum = 1.0f;
    }
}

std::vector<float> LsrModel::mlp_forward(const std::vector<float>& x, int count) {
    std::vector<float> v = x;
    for (size_t i = 0; i < mlp_layers_.size(); ++i) {
        v = mlp_layers_[i].forward(v, count);
        if (i + 1 < mlp_layers_.size()) v = mlp_acts_[i].forward(v);
    }
    return v;
}

std::vector<float> LsrModel::mlp_backward(const std::vector<float>& dout, int count) {
    std::vector<float> d = dout;
    for (int i = static_cast<int>(mlp_layers_.size()) - 1; i >= 0; --i) {
        if (i + 1 < static_cast<int>(mlp_layers_.size()))
            d = mlp_acts_[i].backward_vec(d);
        d = mlp_layers_[i].backward(d, count);
    }
    return d;
}

std::vector<float> LsrModel::query_pixel(const FeatureMap& features, float coord_y,
                                         float coord_x, float cell_y, float cell_x) {
    if (coord_y < -1.0f || coord_y > 1.0f || coord_x < -1.0f || coord_x > 1.0f)
        throw std::invalid_argument("query_pixel: coordinate outside [-1,1]");
    if (features.channels != config_.feature_dim)
        throw std::invalid_argument("query_pixel: feature dim mismatch");
    std::array<CornerEntry, 4> corners;
    std::array<std::vector<float>, 4> inputs;
    float weight_sum = 0.0f;
    corner_setup(features, coord_y, coord_x, cell_y, cell_x, corners, weight_sum, inputs);

    std::vector<float> out(config_.io_channels, 0.0f);
    for (int k = 0; k < 4; ++k) {
        const std::vector<float> pred = mlp_forward(inputs[k], 1);
        const float wn = corners[k].weight / weight_sum;
        for (int c = 0; c < config_.io_channels; ++c) out[c] += wn * pred[c];
    }
    return out;
}

std::vector<float> LsrModel::query_batch_train(const FeatureMap& features,
                                               const std::vector<PixelQuery>& queries) {
    const int n = static_cast<int>(queries.size());
    cached_query_count_ = n;
    cached_feat_h_ = features.height;
    cached_feat_w_ = features.width;
    cached_corners_.resize(static_cast<size_t>(n) * 4);
    cached_corner_weight_sums_.resize(n);

    const int d = mlp_in_dim();
    std::vector<float> x(static_cast<size_t>(n) * 4 * d);
    for (int q = 0; q < n; ++q) {
        std::array<CornerEntry, 4> corners;
        std::array<std::vector<float>, 4> inputs;
        float weight_sum = 0.0f;
        corner_setup(features, queries[q].coord_y, queries[q].coord_x,
                     queries[q].cell_y, queries[q].cell_x, corners, weight_sum, inputs);
        cached_corner_weight_sums_[q] = weight_sum;
        for (int k = 0; k < 4; ++k) {
            const size_t row = static_cast<size_t>(q) * 4 + k;
            corners[k].row = row;
            cached_corners_[row] = corners[k];
            std::copy(inputs[k].begin(), inputs[k].end(), &x[row * d]);
        }
    }

    const std::vector<float> pred = mlp_forward(x, n * 4);
    std::vector<float> out(static_cast<size_t>(n) * config_.io_channels, 0.0f);
    for (int q = 0; q < n; ++q)
        for (int k = 0; k < 4; ++k) {
            const size_t row = static_cast<size_t>(q) * 4 + k;
            const float wn = cached_corners_[row].weight / cached_corner_weight_sums_[q];
            for (int c = 0; c < config_.io_channels; ++c)
                out[static_cast<size_t>(q) * config_.io_channels + c] +=
                    wn * pred[row * config_.io_channels + c];
        }
    return out;
}

Tensor LsrModel::query_batch_backward(const std::vector<float>& d_pred) {
    const int n = cached_query_count_;
    const int c_out = config_.io_channels;
    std::vector<float> d_rows(static_cast<size_t>(n) * 4 * c_out);
    for (int q = 0; q < n; ++q)
        for (int k = 0; k < 4; ++k) {
            const size_t row = static_cast<size_t>(q) * 4 + k;
            const float wn = cached_corners_[row].weight / cached_corner_weight_sums_[q];
            for (int c = 0; c < c_out; ++c)
                d_rows[row * c_out + c] =
                    wn * d_pred[static_cast<size_t>(q) * c_out + c];
        }
    const std::vector<float> dx = mlp_backward(d_rows, n * 4);

    Tensor d_features(cached_feat_h_, cached_feat_w_, config_.feature_dim);
    const int d = mlp_in_dim();
    for (const CornerEntry& corner : cached_corners_)
        for (int c = 0; c < config_.feature_dim; ++c)
            d_features.at(corner.fy, corner.fx, c) += dx[corner.row * d + c];
    return d_features;
}

void LsrModel::save(const std::string& path) const {
    TensorArchive archive;
    Tensor meta(1, 1, 9 + static_cast<int>(config_.mlp_widths.size()));
    meta.data = {static_cast<float>(config_.backbone == BackboneKind::ResidualConv ? 1 : 0),
                 static_cast<float>(config_.depth),
                 static_cast<float>(config_.width),
                 static_cast<float>(config_.feature_dim),
                 static_cast<float>(config_.io_channels),
                 static_cast<float>(config_.window),
                 consistency_bound,
                 final_val_l1,
                 static_cast<float>(config_.mlp_widths.size())};
    for (int w : config_.mlp_widths) meta.data.push_back(static_cast<float>(w));
    archive.put("meta", meta);
    nn::save_params(const_cast<LsrModel*>(this)->params(), archive);
    archive.save(path);
}

LsrModel LsrModel::load(const std::string& path) {
    TensorArchive archive = TensorArchive::load(path);
    const Tensor& meta = archive.get("meta");
    LsrConfig cfg;
    cfg.backbone = meta.data[0] > 0.5f ? BackboneKind::ResidualConv
                                       : BackboneKind::LightweightAttention;
    cfg.depth = static_cast<int>(meta.data[1]);
    cfg.width = static_cast<int>(meta.data[2]);
    cfg.feature_dim = static_cast<int>(meta.data[3]);
    cfg.io_channels = static_cast<int>(meta.data[4]);
    cfg.window = static_cast<int>(meta.data[5]);
    cfg.mlp_widths.clear();
    const int n_mlp = static_cast<int>(meta.data[8]);
    for (int i = 0; i < n_mlp; ++i)
        cfg.mlp_widths.push_back(static_cast<int>(meta.data[9 + i]));
    LsrModel model(cfg, 0);
    model.consistency_bound = meta.data[6];
    model.final_val_l1 = meta.data[7];
    nn::load_params(model.params(), archive);
    return model;
}

// --- Module operations -------------------------------------------------

FeatureMap extract_features(const LatentGrid& latent, LsrModel& model) {
    return model.extract_features(latent);
}

std::vector<float> query_pixel(const FeatureMap& features, float coord_y, float coord_x,
                               float cell_y, float cell_x, LsrModel& model) {
    return model.query_pixel(features, coord_y, coord_x, cell_y, cell_x);
}

LatentGrid upsample_latent(const LatentGrid& latent, int target_h, int target_w,
                           LsrModel& model) {
    if (target_h < latent.height || target_w < latent.width)
        throw std::invalid_argument("upsample_latent: downscale request");
    const FeatureMap features = model.extract_features(latent);
    LatentGrid out(target_h, target_w, model.config().io_channels);
    const float cell_y = 2.0f / target_h, cell_x = 2.0f / target_w;
    for (int y = 0; y < target_h; ++y)
        for (int x = 0; x < target_w; ++x) {
            const std::vector<float> v = model.query_pixel(
                features, -1.0f + (2.0f * y + 1.0f) / target_h,
                -1.0f + (2.0f * x + 1.0f) / target_w, cell_y, cell_x);
            for (int c = 0; c < out.channels; ++c) out.at(y, x, c) = v[c];
        }
    return out;
}

LatentGrid bicubic_latent_upsample(const LatentGrid& latent, int target_h,
                                   int target_w) {
    if (target_h < latent.height || target_w < latent.width)
        throw std::invalid_argument("bicubic_latent_upsample: downscale request");
    if (target_h == latent.height && target_w == latent.width) return latent;
    return resize_bicubic(latent, target_h, target_w);
}

// --- Training ----------------------------------------------------------

LsrModel train_lsr(const std::vector<LatentPair>& pairs, const LsrConfig& config,
                   const LsrTrainConfig& train_cfg, uint64_t seed,
                   std::vector<TrainLogEntry>* log) {
    if (pairs.empty()) throw std::invalid_argument("train_lsr: empty dataset");
    for (const LatentPair& p : pairs) {
        if (p.lr.channels != config.io_channels || p.hr.channels != config.io_channels)
            throw std::invalid_argument("train_lsr: channel-inconsistent pair");
        if (p.augmented)
            throw std::invalid_argument("train_lsr: augmented pair in training data");
    }

    LsrModel model(config, mix_seed(seed, 1));
    nn::ParamRefs params = model.params();
    nn::AdamConfig adam_cfg;
    adam_cfg.lr = train_cfg.lr;
    nn::Adam adam(params, adam_cfg);
    Rng rng(mix_seed(seed, 2));

    // Last ~10% of pairs (at least one) held out for validation.
    const size_t n_val = std::max<size_t>(1, pairs.size() / 10);
    const size_t n_train = pairs.size() > n_val ? pairs.size() - n_val : pairs.size();

    for (int it = 0; it < train_cfg.iterations; ++it) {
        nn::zero_grads(params);
        double loss = 0.0;
        for (int b = 0; b < train_cfg.batch_size; ++b) {
            const LatentPair& pair = pairs[rng.uniform_int(static_cast<int>(n_train))];
            const int fy = pair.hr.height / pair.lr.height;
            const int fx = pair.hr.width / pair.lr.width;
            const int cs_y = std::min(train_cfg.lr_crop, pair.lr.height);
            const int cs_x = std::min(train_cfg.lr_crop, pair.lr.width);
            const int y0 = pair.lr.height > cs_y ? rng.uniform_int(pair.lr.height - cs_y + 1) : 0;
            const int x0 = pair.lr.width > cs_x ? rng.uniform_int(pair.lr.width - cs_x + 1) : 0;
            const LatentGrid lr_crop = crop(pair.lr, y0, x0, cs_y, cs_x);
            const int hr_h = cs_y * fy, hr_w = cs_x * fx;

            std::vector<PixelQuery> queries(train_cfg.hr_samples);
            for (PixelQuery& q : queries) {
                const int hy = rng.uniform_int(hr_h);
                const int hx = rng.uniform_int(hr_w);
                q.coord_y = -1.0f + (2.0f * hy + 1.0f) / hr_h;
                q.coord_x = -1.0f + (2.0f * hx + 1.0f) / hr_w;
                q.cell_y = 2.0f / hr_h;
                q.cell_x = 2.0f / hr_w;
                q.target.resize(config.io_channels);
                for (int c = 0; c < config.io_channels; ++c)
                    q.target[c] = pair.hr.at(y0 * fy + hy, x0 * fx + hx, c);
            }

            const FeatureMap features = model.extract_features(lr_crop);
            const std::vector<float> pred = model.query_batch_train(features, queries);
            std::vector<float> d_pred(pred.size());
            const float inv_n =
                1.0f / (static_cast<float>(pred.size()) * train_cfg.batch_size);
            for (size_t i = 0; i < pred.size(); ++i) {
                const size_t q = i / config.io_channels;
                const float diff = pred[i] - queries[q].target[i % config.io_channels];
                loss += std::fabs(diff) * inv_n;
                d_pred[i] = (diff > 0.0f ? 1.0f : (diff < 0.0f ? -1.0f : 0.0f)) * inv_n;
            }
            const Tensor d_features = model.query_batch_backward(d_pred);
            model.backward_features(d_features);
        }
        if (!std::isfinite(loss))
            throw std::runtime_error("train_lsr: NaN loss at iteration " +
                                     std::to_string(it));
        const float scale = nn::cosine_lr_scale(it, train_cfg.iterations);
        adam.step(scale);
        if (log && (it % train_cfg.log_every == 0 || it + 1 == train_cfg.iterations))
            log->push_back({it, static_cast<float>(loss), train_cfg.lr * scale});
    }

    // Validation L1 and the arbitrary-scale consistency bound on the
    // held-out pairs.
    double val_l1 = 0.0;
    float worst_consistency = 0.0f;
    const size_t val_begin = pairs.size() - n_val;
    for (size_t i = val_begin; i < pairs.size(); ++i) {
        const LatentPair& p = pairs[i];
        const LatentGrid up = upsample_latent(p.lr, p.hr.height, p.hr.width, model);
        val_l1 += mean_abs_diff(up, p.hr);
        const LatentGrid up2 =
            upsample_latent(p.lr, 2 * p.lr.height, 2 * p.lr.width, model);
        const LatentGrid down = resize_bicubic(up2, p.lr.height, p.lr.width);
        worst_consistency = std::max(worst_consistency, mean_abs_diff(down, p.lr));
    }
    model.final_val_l1 = static_cast<float>(val_l1 / n_val);
    model.consistency_bound = 1.5f * worst_consistency;
    return model;
}

}  // namespace lsrna::lsr

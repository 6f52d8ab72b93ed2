#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "lsrna/lsr.hpp"
#include "lsrna/resample.hpp"
#include "lsrna/rng.hpp"
#include "lsrna/tensor.hpp"

using namespace lsrna;
using namespace lsrna::lsr;
namespace fs = std::filesystem;

namespace {

LsrConfig small_config(BackboneKind kind = BackboneKind::ResidualConv) {
    LsrConfig c;
    c.backbone = kind;
    c.depth = 2;
    c.width = 12;
    c.feature_dim = 12;
    c.io_channels = 4;
    c.window = 4;
    c.mlp_widths = {24, 24};
    return c;
}

}  // namespace

TEST_CASE("coordinate grid is cell-centered and symmetric") {
    auto grid = make_coord_grid(4, 2);
    REQUIRE(grid.size() == 8);
    // First cell center along y: -1 + 1/4 = -0.75; cell size 2/4.
    CHECK(grid[0].coord_y == doctest::Approx(-0.75f));
    CHECK(grid[0].coord_x == doctest::Approx(-0.5f));
    CHECK(grid[0].cell_y == doctest::Approx(0.5f));
    CHECK(grid[0].cell_x == doctest::Approx(1.0f));
    // Symmetry about zero.
    CHECK(grid.front().coord_y == doctest::Approx(-grid.back().coord_y));
    CHECK(grid.front().coord_x == doctest::Approx(-grid.back().coord_x));
}

TEST_CASE("full-grid upsample equals the per-pixel query loop bitwise") {
    auto cfg = small_config();
    LsrModel model(cfg, 77);
    Rng rng(78);
    LatentGrid lr = rng.normal_tensor(6, 6, 4);

    LatentGrid up = upsample_latent(lr, 9, 13, model);
    CHECK(up.height == 9);
    CHECK(up.width == 13);
    CHECK(up.channels == 4);

    FeatureMap feats = extract_features(lr, model);
    auto grid = make_coord_grid(9, 13);
    for (int i = 0; i < 9 * 13; ++i) {
        auto pred = query_pixel(feats, grid[i].coord_y, grid[i].coord_x, grid[i].cell_y,
                                grid[i].cell_x, model);
        for (int c = 0; c < 4; ++c) {
            const int y = i / 13, x = i % 13;
            CHECK(up.at(y, x, c) == pred[c]);  // bitwise
        }
    }
}

TEST_CASE("batched training path agrees with the per-pixel path") {
    auto cfg = small_config();
    LsrModel model(cfg, 79);
    Rng rng(80);
    LatentGrid lr = rng.normal_tensor(5, 5, 4);
    FeatureMap feats = model.extract_features(lr);

    std::vector<PixelQuery> queries;
    for (int i = 0; i < 20; ++i) {
        PixelQuery q;
        q.coord_y = rng.uniform() * 2.0f - 1.0f;
        q.coord_x = rng.uniform() * 2.0f - 1.0f;
        q.cell_y = 0.2f;
        q.cell_x = 0.2f;
        queries.push_back(q);
    }
    auto batched = model.query_batch_train(feats, queries);
    for (size_t i = 0; i < queries.size(); ++i) {
        auto single = model.query_pixel(feats, queries[i].coord_y, queries[i].coord_x,
                                        queries[i].cell_y, queries[i].cell_x);
        for (int c = 0; c < 4; ++c)
            CHECK(batched[i * 4 + c] == doctest::Approx(single[c]).epsilon(1e-4));
    }
}

TEST_CASE("prediction is continuous in the query coordinate") {
    auto cfg = small_config(BackboneKind::LightweightAttention);
    LsrModel model(cfg, 81);
    Rng rng(82);
    LatentGrid lr = rng.normal_tensor(8, 8, 4);
    FeatureMap feats = model.extract_features(lr);

    // Walk a fine line across cell boundaries; successive predictions
    // must not jump.
    std::vector<float> prev;
    for (int i = 0; i <= 200; ++i) {
        const float x = -0.9f + 1.8f * i / 200.0f;
        auto pred = model.query_pixel(feats, 0.1f, x, 0.1f, 0.1f);
        if (!prev.empty()) {
            for (int c = 0; c < 4; ++c)
                CHECK(std::abs(pred[c] - prev[c]) < 0.15f);
        }
        prev = pred;
    }
}

TEST_CASE("queries outside the coordinate range are rejected") {
    auto cfg = small_config();
    LsrModel model(cfg, 83);
    Rng rng(84);
    FeatureMap feats = model.extract_features(rng.normal_tensor(4, 4, 4));
    CHECK_THROWS(model.query_pixel(feats, 1.5f, 0.0f, 0.1f, 0.1f));
    CHECK_THROWS(model.query_pixel(feats, 0.0f, -1.01f, 0.1f, 0.1f));
}

TEST_CASE("upsample rejects downscaling") {
    auto cfg = small_config();
    LsrModel model(cfg, 85);
    Rng rng(86);
    LatentGrid lr = rng.normal_tensor(6, 6, 4);
    CHECK_THROWS(upsample_latent(lr, 3, 6, model));
    CHECK_THROWS(bicubic_latent_upsample(lr, 6, 3));
}

TEST_CASE("bicubic latent baseline is identity at scale 1") {
    Rng rng(87);
    LatentGrid lr = rng.normal_tensor(5, 7, 4);
    CHECK(max_abs_diff(bicubic_latent_upsample(lr, 5, 7), lr) < 1e-6f);
}

TEST_CASE("arbitrary non-integer target sizes work") {
    auto cfg = small_config();
    LsrModel model(cfg, 88);
    Rng rng(89);
    LatentGrid lr = rng.normal_tensor(6, 6, 4);
    for (auto [h, w] : std::vector<std::pair<int, int>>{{7, 11}, {9, 9}, {15, 8}}) {
        LatentGrid up = upsample_latent(lr, h, w, model);
        CHECK(up.height == h);
        CHECK(up.width == w);
        CHECK(all_finite(up));
    }
}

TEST_CASE("model save/load reproduces predictions bitwise") {
    auto cfg = small_config(BackboneKind::LightweightAttention);
    LsrModel model(cfg, 90);
    Rng rng(91);
    LatentGrid lr = rng.normal_tensor(6, 6, 4);
    LatentGrid before = upsample_latent(lr, 12, 12, model);

    const auto p = (fs::temp_directory_path() / "lsrna_lsr_model.lta").string();
    model.save(p);
    LsrModel loaded = LsrModel::load(p);
    CHECK(loaded.config().depth == cfg.depth);
    CHECK(loaded.config().backbone == cfg.backbone);
    LatentGrid after = upsample_latent(lr, 12, 12, loaded);
    CHECK(before.data == after.data);
    fs::remove(p);
}

TEST_CASE("training on bicubic-consistent pairs reduces the loss") {
    // Ground truth: latent pairs where HR is a smooth function sampled at
    // two resolutions, so the task is learnable.
    Rng rng(92);
    std::vector<LatentPair> pairs;
    for (int i = 0; i < 6; ++i) {
        LatentGrid hr(16, 16, 4);
        const float fy = 0.3f + 0.1f * i, fx = 0.5f + 0.07f * i;
        for (int y = 0; y < 16; ++y)
            for (int x = 0; x < 16; ++x)
                for (int c = 0; c < 4; ++c)
                    hr.at(y, x, c) = std::sin(fy * y + c) * std::cos(fx * x);
        LatentPair p;
        p.hr = hr;
        p.lr = resize_area(hr, 8, 8);
        p.scale_factor = 2.0f;
        pairs.push_back(p);
    }

    auto cfg = small_config();
    LsrTrainConfig tc;
    tc.iterations = 40;
    tc.batch_size = 4;
    tc.lr = 1e-3f;
    tc.lr_crop = 8;
    tc.hr_samples = 64;
    tc.log_every = 2;
    std::vector<TrainLogEntry> log;
    LsrModel model = train_lsr(pairs, cfg, tc, 93, &log);
    REQUIRE(log.size() >= 4);
    double head = 0, tail = 0;
    const size_t q = log.size() / 4;
    for (size_t i = 0; i < q; ++i) head += log[i].loss;
    for (size_t i = log.size() - q; i < log.size(); ++i) tail += log[i].loss;
    CHECK(tail / q < head / q);
    CHECK(model.final_val_l1 >= 0.0f);
    CHECK(model.consistency_bound > 0.0f);
}

TEST_CASE("training rejects augmented pairs") {
    Rng rng(94);
    LatentPair p;
    p.hr = rng.normal_tensor(8, 8, 4);
    p.lr = rng.normal_tensor(4, 4, 4);
    p.scale_factor = 2.0f;
    p.augmented = true;
    LsrTrainConfig tc;
    tc.iterations = 1;
    tc.lr_crop = 4;
    tc.hr_samples = 4;
    CHECK_THROWS(train_lsr({p}, small_config(), tc, 1, nullptr));
}

TEST_CASE("config validation rejects nonsense") {
    LsrConfig bad = small_config();
    bad.depth = 0;
    CHECK_THROWS(bad.validate());
    LsrConfig bad2 = small_config();
    bad2.mlp_widths.clear();
    CHECK_THROWS(bad2.validate());
}

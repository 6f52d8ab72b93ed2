#include <doctest.h>

#include <filesystem>

#include "lsrna/codec.hpp"
#include "lsrna/dataprep.hpp"
#include "lsrna/rng.hpp"
#include "lsrna/tensor.hpp"

using namespace lsrna;
using namespace lsrna::codec;
namespace fs = std::filesystem;

TEST_CASE("invertible mock round-trips bitwise") {
    for (int s : {2, 4, 8}) {
        Codec cdc(CodecSpec::invertible_mock(s));
        Rng rng(1000 + s);
        RgbImage img(4 * s, 3 * s, 3);
        for (float& v : img.data) v = rng.uniform();
        LatentGrid z = cdc.encode(img);
        CHECK(z.height == 4);
        CHECK(z.width == 3);
        CHECK(z.channels == 3 * s * s);
        RgbImage back = cdc.decode(z);
        REQUIRE(back.same_shape(img));
        CHECK(back.data == img.data);  // exact, not approximate
    }
}

TEST_CASE("mock encode mixes channels (not a plain reshape)") {
    Codec cdc(CodecSpec::invertible_mock(2));
    RgbImage img(2, 2, 3);
    for (size_t i = 0; i < img.size(); ++i) img.data[i] = static_cast<float>(i + 1);
    LatentGrid z = cdc.encode(img);
    // Same multiset of magnitudes, different order or signs.
    bool identical = true;
    for (size_t i = 0; i < z.size(); ++i)
        if (z.data[i] != img.data[i]) identical = false;
    CHECK_FALSE(identical);
}

TEST_CASE("encode validates divisibility and finiteness") {
    Codec cdc(CodecSpec::invertible_mock(4));
    RgbImage bad(6, 8, 3);
    CHECK_THROWS(cdc.encode(bad));
    RgbImage nan_img(4, 4, 3);
    nan_img.data[0] = std::nanf("");
    CHECK_THROWS(cdc.encode(nan_img));
    LatentGrid wrong(1, 1, 7);
    CHECK_THROWS(cdc.decode(wrong));
}

TEST_CASE("spec validation rejects inconsistent mock channel counts") {
    CodecSpec spec{4, 10, Backend::InvertibleMock};
    CHECK_THROWS(spec.validate());
    CHECK_NOTHROW(CodecSpec::invertible_mock(4).validate());
    CHECK_NOTHROW(CodecSpec::learned_tiny(8, 4).validate());
}

TEST_CASE("tiny autoencoder shapes and save/load") {
    TinyAutoencoder ae(4, 4, 12, 42);
    Rng rng(2001);
    RgbImage img(16, 16, 3);
    for (float& v : img.data) v = rng.uniform();
    LatentGrid z = ae.encode(img);
    CHECK(z.height == 4);
    CHECK(z.width == 4);
    CHECK(z.channels == 4);
    RgbImage rec = ae.decode(z);
    CHECK(rec.same_shape(img));
    for (float v : rec.data) {
        CHECK(v >= 0.0f);
        CHECK(v <= 1.0f);
    }

    const auto p = (fs::temp_directory_path() / "lsrna_tiny_ae.lta").string();
    ae.save(p);
    auto loaded = TinyAutoencoder::load(p);
    CHECK(loaded.s() == 4);
    CHECK(loaded.latent_channels() == 4);
    LatentGrid z2 = loaded.encode(img);
    CHECK(max_abs_diff(z, z2) == 0.0f);
    fs::remove(p);
}

TEST_CASE("codec training reduces reconstruction error") {
    std::vector<RgbImage> images;
    for (int i = 0; i < 4; ++i)
        images.push_back(dataprep::synthesize_desk_image(i % 3, 64, 5000 + i));

    CodecSpec spec = CodecSpec::learned_tiny(2, 6);
    CodecTrainConfig cfg;
    cfg.iterations = 60;
    cfg.batch_size = 4;
    cfg.lr = 2e-3f;
    cfg.image_size = 16;
    std::vector<TrainLogEntry> log;
    auto model = train_codec(images, spec, cfg, 7, &log);
    REQUIRE(log.size() >= 2);
    // Average of the last quarter below the first quarter.
    double head = 0, tail = 0;
    size_t q = std::max<size_t>(1, log.size() / 4);
    for (size_t i = 0; i < q; ++i) head += log[i].loss;
    for (size_t i = log.size() - q; i < log.size(); ++i) tail += log[i].loss;
    CHECK(tail / q < head / q);
    CHECK(model.val_error >= 0.0f);
    CHECK(model.val_error < 0.5f);
}

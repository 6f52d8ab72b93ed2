#include <doctest.h>

#include <filesystem>

#include "lsrna/denoiser.hpp"
#include "lsrna/diffusion.hpp"
#include "lsrna/rng.hpp"
#include "lsrna/tensor.hpp"

using namespace lsrna;
using namespace lsrna::refgen;
namespace fs = std::filesystem;

namespace {

DenoiserConfig small_config() {
    DenoiserConfig c;
    c.channels = 3;
    c.width = 10;
    c.depth = 2;
    c.n_classes = 3;
    c.time_dim = 16;
    return c;
}

}  // namespace

TEST_CASE("denoiser runs on arbitrary latent sizes") {
    ToyDenoiser model(small_config(), 50);
    Rng rng(51);
    for (auto [h, w] : std::vector<std::pair<int, int>>{{8, 8}, {6, 10}, {16, 12}}) {
        Tensor z = rng.normal_tensor(h, w, 3);
        Tensor eps = model.forward(z, 10, 0);
        CHECK(eps.same_shape(z));
        CHECK(all_finite(eps));
    }
}

TEST_CASE("class and time conditioning both matter") {
    ToyDenoiser model(small_config(), 52);
    Rng rng(53);
    Tensor z = rng.normal_tensor(8, 8, 3);
    Tensor e0 = model.forward(z, 10, 0);
    Tensor e1 = model.forward(z, 10, 1);
    CHECK(max_abs_diff(e0, e1) > 1e-6f);
    Tensor et = model.forward(z, 90, 0);
    CHECK(max_abs_diff(e0, et) > 1e-6f);
    CHECK_THROWS(model.forward(z, 10, 5));
    CHECK_THROWS(model.forward(z, 10, -1));
}

TEST_CASE("training reduces the epsilon loss") {
    Rng rng(54);
    std::vector<LabeledLatent> data;
    for (int i = 0; i < 6; ++i) {
        LabeledLatent d;
        d.label = i % 3;
        d.latent = Tensor(8, 8, 3, 0.3f * (d.label - 1));
        data.push_back(d);
    }
    auto schedule = NoiseSchedule::linear(100);
    DenoiserTrainConfig tc;
    tc.iterations = 60;
    tc.batch_size = 4;
    tc.lr = 3e-3f;
    tc.log_every = 2;
    std::vector<DenoiserTrainLogEntry> log;
    ToyDenoiser model = train_toy_denoiser(data, schedule, small_config(), tc, 55, &log);
    REQUIRE(log.size() >= 4);
    double head = 0, tail = 0;
    const size_t q = log.size() / 4;
    for (size_t i = 0; i < q; ++i) head += log[i].loss;
    for (size_t i = log.size() - q; i < log.size(); ++i) tail += log[i].loss;
    CHECK(tail / q < head / q);
    CHECK(model.trained_iterations == 60);
}

TEST_CASE("save/load reproduces the forward pass bitwise") {
    ToyDenoiser model(small_config(), 56);
    model.trained_iterations = 5;
    Rng rng(57);
    Tensor z = rng.normal_tensor(6, 6, 3);
    Tensor before = model.forward(z, 33, 2);

    const auto p = (fs::temp_directory_path() / "lsrna_denoiser.lta").string();
    model.save(p);
    ToyDenoiser loaded = ToyDenoiser::load(p);
    CHECK(loaded.trained_iterations == 5);
    Tensor after = loaded.forward(z, 33, 2);
    CHECK(before.data == after.data);
    fs::remove(p);
}

TEST_CASE("reference generation is deterministic and label-sensitive") {
    ToyDenoiser model(small_config(), 58);
    model.trained_iterations = 1;  // mark as trained
    auto schedule = NoiseSchedule::linear(100);
    LatentGrid a = generate_reference(0, model, schedule, 10, 6, 6, 99);
    LatentGrid b = generate_reference(0, model, schedule, 10, 6, 6, 99);
    CHECK(a.data == b.data);
    LatentGrid c = generate_reference(1, model, schedule, 10, 6, 6, 99);
    CHECK(max_abs_diff(a, c) > 1e-6f);
    LatentGrid d = generate_reference(0, model, schedule, 10, 6, 6, 100);
    CHECK(max_abs_diff(a, d) > 1e-6f);
    CHECK(all_finite(a));
}

TEST_CASE("untrained model refuses to generate") {
    ToyDenoiser model(small_config(), 59);
    auto schedule = NoiseSchedule::linear(100);
    CHECK_THROWS(generate_reference(0, model, schedule, 10, 6, 6, 1));
}

TEST_CASE("predictor adapter binds the label") {
    ToyDenoiser model(small_config(), 60);
    Rng rng(61);
    Tensor z = rng.normal_tensor(6, 6, 3);
    auto pred = model.as_predictor(1);
    Tensor via_adapter = pred(z, 20);
    Tensor direct = model.forward(z, 20, 1);
    CHECK(via_adapter.data == direct.data);
}

TEST_CASE("config validation") {
    DenoiserConfig bad = small_config();
    bad.width = 0;
    CHECK_THROWS(bad.validate());
    DenoiserConfig bad2 = small_config();
    bad2.n_classes = 0;
    CHECK_THROWS(bad2.validate());
}

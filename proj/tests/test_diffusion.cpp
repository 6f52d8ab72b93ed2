#include <doctest.h>

#include <cmath>

#include "lsrna/diffusion.hpp"
#include "lsrna/rng.hpp"
#include "lsrna/tensor.hpp"

using namespace lsrna;
using namespace lsrna::refgen;

TEST_CASE("linear schedule is well-formed") {
    auto s = NoiseSchedule::linear(1000);
    CHECK_NOTHROW(s.validate());
    CHECK(s.total_steps == 1000);
    CHECK(s.alpha_cum(0) == doctest::Approx(1.0));
    for (int t = 1; t <= 1000; ++t) CHECK(s.alpha_cum(t) < s.alpha_cum(t - 1));
    // Direct product oracle at a few points.
    double prod = 1.0;
    for (int t = 1; t <= 1000; ++t) {
        prod *= 1.0 - s.betas[t - 1];
        if (t == 1 || t == 500 || t == 1000)
            CHECK(s.alpha_cum(t) == doctest::Approx(prod).epsilon(1e-9));
    }
}

TEST_CASE("forward noise at t=0 is an exact passthrough") {
    auto s = NoiseSchedule::linear(100);
    Rng rng(1);
    LatentGrid z0 = rng.normal_tensor(4, 4, 2);
    LatentGrid z = forward_noise(z0, 0, s, 9);
    CHECK(z.data == z0.data);
}

TEST_CASE("forward marginal matches the stepwise composition in moments") {
    // Chain z_t = sqrt(1-beta_t) z_{t-1} + sqrt(beta_t) eps_t applied
    // step by step must produce the closed-form marginal
    // sqrt(acum) z0 + sqrt(1-acum) eps. Compare mean/variance over many
    // draws for a scalar z0.
    auto s = NoiseSchedule::linear(50, 0.01f, 0.05f);
    const int t = 20;
    const int n = 20000;
    const double z0 = 0.8;
    Rng rng(42);
    double sum = 0, sq = 0;
    for (int i = 0; i < n; ++i) {
        double z = z0;
        for (int step = 1; step <= t; ++step) {
            const double b = s.betas[step - 1];
            z = std::sqrt(1.0 - b) * z + std::sqrt(b) * rng.normal();
        }
        sum += z;
        sq += z * z;
    }
    const double mean = sum / n;
    const double var = sq / n - mean * mean;
    const double acum = s.alpha_cum(t);
    CHECK(mean == doctest::Approx(std::sqrt(acum) * z0).epsilon(0.03));
    CHECK(var == doctest::Approx(1.0 - acum).epsilon(0.05));

    // And the closed-form implementation itself.
    LatentGrid z0t(1, 1, 1, static_cast<float>(z0));
    Tensor eps(1, 1, 1, 0.5f);
    LatentGrid zt = forward_noise_with(z0t, t, s, eps);
    CHECK(zt.data[0] ==
          doctest::Approx(std::sqrt(acum) * z0 + std::sqrt(1 - acum) * 0.5).epsilon(1e-5));
}

TEST_CASE("ddim sigma at eta=1 equals the ddpm posterior std") {
    auto s = NoiseSchedule::linear(200);
    for (int t : {5, 50, 150}) {
        const double at = s.alpha_cum(t), ap = s.alpha_cum(t - 1);
        const double beta_t = s.betas[t - 1];
        const double posterior_var = (1.0 - ap) / (1.0 - at) * beta_t;
        const double sigma = ddim_sigma(s, t, t - 1, 1.0f);
        CHECK(sigma * sigma == doctest::Approx(posterior_var).epsilon(1e-6));
    }
    CHECK(ddim_sigma(s, 50, 40, 0.0f) == 0.0);
}

TEST_CASE("perfect epsilon prediction recovers z0 through a full ddim pass") {
    auto s = NoiseSchedule::linear(100);
    Rng rng(7);
    LatentGrid z0 = rng.normal_tensor(3, 3, 2);
    Tensor eps = rng.normal_tensor(3, 3, 2);
    const int t_start = 80;
    LatentGrid z = forward_noise_with(z0, t_start, s, eps);

    CHECK(max_abs_diff(ddim_x0_estimate(z, eps, t_start, s), z0) < 1e-4f);

    auto ts = ddim_timesteps(t_start, 10);
    for (size_t i = 0; i + 1 < ts.size(); ++i)
        z = ddim_step(z, eps, ts[i], ts[i + 1], s, 0.0f, 0);
    CHECK(max_abs_diff(z, z0) < 1e-3f);
}

TEST_CASE("ddim step validates timestep ordering") {
    auto s = NoiseSchedule::linear(100);
    LatentGrid z(2, 2, 1), eps(2, 2, 1);
    CHECK_THROWS(ddim_step(z, eps, 10, 20, s, 0.0f, 0));
    CHECK_THROWS(ddim_step(z, eps, 10, -1, s, 0.0f, 0));
}

TEST_CASE("ddim timesteps cover t_start down to 0 strictly decreasing") {
    for (int steps : {5, 10, 30}) {
        auto ts = ddim_timesteps(500, steps);
        CHECK(ts.front() == 500);
        CHECK(ts.back() == 0);
        CHECK(ts.size() == static_cast<size_t>(steps) + 1);
        for (size_t i = 1; i < ts.size(); ++i) CHECK(ts[i] < ts[i - 1]);
    }
}

TEST_CASE("blend weight has the right endpoints and decays monotonically") {
    const int t_init = 300;
    CHECK(guidance_blend_weight(t_init, t_init, 1.0f) == doctest::Approx(1.0));
    CHECK(guidance_blend_weight(0, t_init, 1.0f) == doctest::Approx(0.0));
    double prev = 1.0;
    for (int t = t_init; t >= 0; t -= 10) {
        double c = guidance_blend_weight(t, t_init, 1.0f);
        CHECK(c <= prev + 1e-12);
        CHECK(c >= 0.0);
        CHECK(c <= 1.0);
        prev = c;
    }
    // A larger exponent decays faster everywhere in the interior.
    CHECK(guidance_blend_weight(150, t_init, 2.0f) <
          guidance_blend_weight(150, t_init, 1.0f));
}

TEST_CASE("guidance injection endpoints") {
    auto s = NoiseSchedule::linear(100);
    GuidanceConfig g;
    g.t_init = 60;
    Rng rng(11);
    LatentGrid z = rng.normal_tensor(3, 3, 2);
    LatentGrid guide = rng.normal_tensor(3, 3, 2);
    Tensor eps = rng.normal_tensor(3, 3, 2);

    // c == 0 at t == 0: z untouched.
    LatentGrid at0 = inject_guidance_with(z, guide, 0, g, s, eps);
    CHECK(at0.data == z.data);

    // c == 1 at t == t_init: pure noised guidance.
    LatentGrid at_init = inject_guidance_with(z, guide, 60, g, s, eps);
    LatentGrid noised = forward_noise_with(guide, 60, s, eps);
    CHECK(max_abs_diff(at_init, noised) < 1e-6f);

    CHECK_THROWS(inject_guidance_with(z, guide, 70, g, s, eps));
}

TEST_CASE("t_init resolution from the target alpha_cum") {
    auto s = NoiseSchedule::linear(1000);
    GuidanceConfig g;
    g.target_alpha_cum = 0.5;
    const int t = g.resolve_t_init(s);
    CHECK(s.alpha_cum(t) <= 0.5);
    CHECK(s.alpha_cum(t - 1) > 0.5);
    GuidanceConfig fixed;
    fixed.t_init = 123;
    CHECK(fixed.resolve_t_init(s) == 123);
}

TEST_CASE("patch plan covers the grid with positive weights") {
    auto plan = PatchPlan::build(20, 14, 8, 8, 4);
    CHECK(plan.weight_sum.height == 20);
    for (float v : plan.weight_sum.data) CHECK(v >= 1.0f);
    // Every offset keeps the patch inside the grid.
    for (auto [y, x] : plan.offsets) {
        CHECK(y >= 0);
        CHECK(x >= 0);
        CHECK(y + 8 <= 20);
        CHECK(x + 8 <= 14);
    }
    // Oversized patches are clamped to the grid.
    auto clamped = PatchPlan::build(4, 4, 8, 8, 4);
    CHECK(clamped.patch_h == 4);
    CHECK(clamped.offsets.size() == 1);
}

TEST_CASE("patchwise prediction is a partition of unity") {
    auto s = NoiseSchedule::linear(100);
    Rng rng(13);
    LatentGrid z = rng.normal_tensor(12, 12, 3);

    // Constant predictor: blending must reproduce the constant exactly.
    EpsPredictor constant = [](const Tensor& p, int) {
        return Tensor(p.height, p.width, p.channels, 0.37f);
    };
    auto plan = PatchPlan::build(12, 12, 8, 8, 4);
    Tensor out = patchwise_predict(z, constant, plan, 10);
    for (float v : out.data) CHECK(v == doctest::Approx(0.37f).epsilon(1e-6));

    // Content-dependent linear predictor, single whole-grid patch ==
    // direct application.
    EpsPredictor linear_pred = [](const Tensor& p, int) { return scaled(p, 0.5f); };
    auto whole = PatchPlan::build(12, 12, 12, 12, 12);
    Tensor blended = patchwise_predict(z, linear_pred, whole, 10);
    CHECK(max_abs_diff(blended, scaled(z, 0.5f)) < 1e-6f);
}

TEST_CASE("upsample mode names round-trip") {
    for (auto m : {UpsampleMode::Lsr, UpsampleMode::LatentBicubic, UpsampleMode::RgbBicubic,
                   UpsampleMode::RgbSr})
        CHECK(parse_upsample_mode(to_string(m)) == m);
    CHECK_THROWS(parse_upsample_mode("nope"));
}

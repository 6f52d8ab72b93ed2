// lsrna command-line front end: data prep, the three trainings, guided
// generation, the two sweeps, visualizations and evaluation. Every
// command takes --config/--set/--seed and records a manifest next to its
// outputs.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "lsrna/archive.hpp"
#include "lsrna/codec.hpp"
#include "lsrna/config.hpp"
#include "lsrna/dataprep.hpp"
#include "lsrna/denoiser.hpp"
#include "lsrna/diffusion.hpp"
#include "lsrna/image_io.hpp"
#include "lsrna/lsr.hpp"
#include "lsrna/metrics.hpp"
#include "lsrna/pipeline.hpp"
#include "lsrna/plot.hpp"
#include "lsrna/resample.hpp"
#include "lsrna/rna.hpp"
#include "lsrna/tensor.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace lsrna;

namespace {

struct Common {
    std::string config_path;
    std::vector<std::string> overrides;
    long long seed = -1;
    std::string out;
};

void add_common(CLI::App* app, Common& c) {
    app->add_option("--config", c.config_path, "JSON config file");
    app->add_option("--set", c.overrides, "dotted-path override, e.g. rna.e_max=0.8");
    app->add_option("--seed", c.seed, "global seed (overrides config)");
    app->add_option("--out", c.out, "output directory (overrides config)");
}

cli::RunConfig resolve(const Common& c) {
    auto cfg = cli::RunConfig::load(c.config_path, c.overrides);
    if (c.seed >= 0) cfg.tree["seed"] = static_cast<uint64_t>(c.seed);
    if (!c.out.empty()) cfg.tree["out_dir"] = c.out;
    return cfg;
}

cli::RunManifest start_run(const cli::RunConfig& cfg) {
    cli::RunManifest m;
    m.out_dir = cfg.str("out_dir");
    m.seed = cfg.seed();
    m.config_hash = cfg.hash();
    cfg.echo_to(m.out_dir);
    return m;
}

codec::CodecSpec codec_spec_from(const cli::RunConfig& cfg) {
    const std::string backend = cfg.str("codec.backend");
    if (backend == "invertible-mock")
        return codec::CodecSpec::invertible_mock(cfg.integer("codec.s"));
    if (backend == "learned-tiny")
        return codec::CodecSpec::learned_tiny(cfg.integer("codec.s"),
                                              cfg.integer("codec.channels"));
    throw std::runtime_error("unknown codec.backend: " + backend);
}

codec::Codec make_codec(const cli::RunConfig& cfg) {
    const auto spec = codec_spec_from(cfg);
    if (spec.backend == codec::Backend::InvertibleMock) return codec::Codec(spec);
    fs::path model = fs::path(cfg.str("out_dir")) / "codec.lta";
    if (!fs::exists(model))
        throw std::runtime_error("learned codec requires " + model.string() +
                                 "; run train-codec first");
    return codec::Codec(spec, codec::TinyAutoencoder::load(model.string()));
}

lsr::LsrConfig lsr_config_from(const cli::RunConfig& cfg, int io_channels) {
    lsr::LsrConfig lc;
    const std::string bb = cfg.str("lsr.backbone");
    if (bb == "residual-conv")
        lc.backbone = lsr::BackboneKind::ResidualConv;
    else if (bb == "lightweight-attention")
        lc.backbone = lsr::BackboneKind::LightweightAttention;
    else
        throw std::runtime_error("unknown lsr.backbone: " + bb);
    lc.depth = cfg.integer("lsr.depth");
    lc.width = cfg.integer("lsr.width");
    lc.feature_dim = cfg.integer("lsr.feature_dim");
    lc.window = cfg.integer("lsr.window");
    lc.io_channels = io_channels;
    lc.mlp_widths.clear();
    for (const auto& w : cfg.at("lsr.mlp_widths")) lc.mlp_widths.push_back(w.get<int>());
    return lc;
}

rna::RnaConfig rna_config_from(const cli::RunConfig& cfg) {
    rna::RnaConfig rc;
    rc.e_min = static_cast<float>(cfg.num("rna.e_min"));
    rc.e_max = static_cast<float>(cfg.num("rna.e_max"));
    rc.canny_low = static_cast<float>(cfg.num("rna.canny_low"));
    rc.canny_high = static_cast<float>(cfg.num("rna.canny_high"));
    rc.blur_sigma = static_cast<float>(cfg.num("rna.blur_sigma"));
    return rc;
}

refgen::NoiseSchedule schedule_from(const cli::RunConfig& cfg) {
    return refgen::NoiseSchedule::linear(cfg.integer("diffusion.total_steps"),
                                         static_cast<float>(cfg.num("diffusion.beta_start")),
                                         static_cast<float>(cfg.num("diffusion.beta_end")));
}

refgen::GuidanceConfig guidance_from(const cli::RunConfig& cfg) {
    refgen::GuidanceConfig g;
    g.t_init = cfg.integer("guidance.t_init");
    g.target_alpha_cum = cfg.num("guidance.target_alpha_cum");
    g.steps = cfg.integer("guidance.steps");
    g.eta = static_cast<float>(cfg.num("guidance.eta"));
    g.blend_exponent = static_cast<float>(cfg.num("guidance.blend_exponent"));
    g.upsample_mode = refgen::parse_upsample_mode(cfg.str("guidance.upsample_mode"));
    return g;
}

metrics::PatchProtocol protocol_from(const cli::RunConfig& cfg) {
    metrics::PatchProtocol p;
    p.patch_size = cfg.integer("metrics.patch_size");
    p.num_patches = cfg.integer("metrics.num_patches");
    p.seed = cfg.at("metrics.patch_seed").get<uint64_t>();
    return p;
}

metrics::FeatureEmbedder embedder_from(const cli::RunConfig& cfg) {
    metrics::EmbedderConfig e;
    e.backend = cfg.str("metrics.embedder.backend");
    e.input_size = cfg.integer("metrics.embedder.input_size");
    e.hidden_dim = cfg.integer("metrics.embedder.hidden_dim");
    e.feature_dim = cfg.integer("metrics.embedder.feature_dim");
    e.seed = cfg.at("metrics.embedder.seed").get<uint64_t>();
    e.feature_file = cfg.str("metrics.embedder.feature_file");
    return metrics::FeatureEmbedder(e);
}

// Load the run's source images: from data.dir when set, otherwise the
// synthesized desk set (deterministic in the seed).
std::vector<RgbImage> load_images(const cli::RunConfig& cfg, std::vector<int>* labels,
                                  std::vector<std::string>* names) {
    std::vector<RgbImage> images;
    const std::string dir = cfg.str("data.dir");
    if (!dir.empty()) {
        std::vector<fs::path> paths;
        for (const auto& e : fs::directory_iterator(dir))
            if (e.path().extension() == ".png") paths.push_back(e.path());
        std::sort(paths.begin(), paths.end());
        for (const auto& p : paths) {
            images.push_back(read_png(p.string()));
            if (labels) labels->push_back(static_cast<int>(labels->size()) % 3);
            if (names) names->push_back(p.stem().string());
        }
        return images;
    }
    const int count = cfg.integer("data.synthetic_count");
    const int size = cfg.integer("data.image_size");
    const int classes = cfg.integer("data.classes");
    for (int i = 0; i < count; ++i) {
        const int label = i % classes;
        images.push_back(dataprep::synthesize_desk_image(label, size,
                                                         mix_seed(cfg.seed(), 0x1000u + i)));
        if (labels) labels->push_back(label);
        if (names) {
            char buf[32];
            std::snprintf(buf, sizeof(buf), "img_c%d_%03d", label, i);
            names->push_back(buf);
        }
    }
    return images;
}

void plot_training_log(const std::vector<std::pair<double, double>>& pts,
                       const std::string& title, const std::string& path) {
    plot::Series s;
    s.label = title;
    for (const auto& [x, y] : pts) {
        s.xs.push_back(x);
        s.ys.push_back(y);
    }
    plot::render_chart({s}, title, path);
}

// --- Commands ----------------------------------------------------------

int cmd_prep(const Common& c) {
    auto cfg = resolve(c);
    auto manifest = start_run(cfg);
    const fs::path out = manifest.out_dir;

    std::vector<int> labels;
    std::vector<std::string> names;
    auto images = load_images(cfg, &labels, &names);
    std::cout << "prep: " << images.size() << " source images\n";

    fs::create_directories(out / "images");
    for (size_t i = 0; i < images.size(); ++i) {
        write_png((out / "images" / (names[i] + ".png")).string(), images[i]);
        manifest.add("images/" + names[i] + ".png");
    }

    auto cdc = make_codec(cfg);
    dataprep::DataprepConfig dc;
    dc.crop_min = cfg.integer("dataprep.crop_min");
    dc.crop_max = cfg.integer("dataprep.crop_max");
    dc.crop_quantum = cfg.integer("dataprep.crop_quantum");
    dc.factors.clear();
    for (const auto& f : cfg.at("dataprep.factors")) dc.factors.push_back(f.get<int>());
    dc.min_source_resolution = cfg.integer("dataprep.min_source_resolution");
    dc.max_crops_per_image = cfg.integer("dataprep.max_crops_per_image");
    dc.rng_seed = cfg.seed();
    dc.validate(cdc.spec().s);

    auto records = dataprep::build_pair_dataset(images, names, cdc, dc);
    std::cout << "prep: " << records.size() << " latent pairs\n";
    dataprep::save_pair_dataset(records, (out / "pairs").string());
    manifest.add("pairs/manifest.json");

    // Base-resolution labeled latents for the reference generator: each
    // source image downscaled to a small square and encoded.
    const int s = cdc.spec().s;
    const int base = cfg.integer("generate.base_size") * s;
    TensorArchive base_arch;
    Tensor label_tensor(1, 1, static_cast<int>(images.size()));
    for (size_t i = 0; i < images.size(); ++i) {
        RgbImage small = resize_bicubic(images[i], base, base);
        small = clamp01(small);
        char key[32];
        std::snprintf(key, sizeof(key), "z%04zu", i);
        base_arch.put(key, cdc.encode(small));
        label_tensor.data[i] = static_cast<float>(labels[i]);
    }
    base_arch.put("labels", label_tensor);
    base_arch.save((out / "base.lta").string());
    manifest.add("base.lta");

    manifest.write();
    return 0;
}

int cmd_train_codec(const Common& c) {
    auto cfg = resolve(c);
    auto manifest = start_run(cfg);
    const fs::path out = manifest.out_dir;

    const auto spec = codec_spec_from(cfg);
    if (spec.backend != codec::Backend::LearnedTiny) {
        std::cout << "train-codec: invertible-mock backend needs no training\n";
        manifest.write();
        return 0;
    }
    auto images = load_images(cfg, nullptr, nullptr);
    codec::CodecTrainConfig tc;
    tc.iterations = cfg.integer("codec.train.iterations");
    tc.batch_size = cfg.integer("codec.train.batch");
    tc.lr = static_cast<float>(cfg.num("codec.train.lr"));
    tc.image_size = cfg.integer("codec.train.crop");
    std::vector<codec::TrainLogEntry> log;
    auto model = codec::train_codec(images, spec, tc, cfg.seed(), &log);
    model.save((out / "codec.lta").string());
    manifest.add("codec.lta");
    std::cout << "train-codec: val reconstruction MAE " << model.val_error << "\n";

    std::vector<std::pair<double, double>> pts;
    for (const auto& e : log) pts.emplace_back(e.iteration, e.loss);
    plot_training_log(pts, "codec", (out / "codec_loss.png").string());
    manifest.add("codec_loss.png");
    manifest.write();
    return 0;
}

int cmd_train_lsr(const Common& c) {
    auto cfg = resolve(c);
    auto manifest = start_run(cfg);
    const fs::path out = manifest.out_dir;

    auto records = dataprep::load_pair_dataset((out / "pairs").string());
    auto pairs = dataprep::to_latent_pairs(records);
    if (pairs.empty()) throw std::runtime_error("train-lsr: empty pair dataset");
    const int channels = pairs.front().lr.channels;

    lsr::LsrTrainConfig tc;
    tc.iterations = cfg.integer("lsr.train.iterations");
    tc.batch_size = cfg.integer("lsr.train.batch");
    tc.lr = static_cast<float>(cfg.num("lsr.train.lr"));
    tc.lr_crop = cfg.integer("lsr.train.lr_crop");
    tc.hr_samples = cfg.integer("lsr.train.hr_samples");

    std::vector<lsr::TrainLogEntry> log;
    auto model = lsr::train_lsr(pairs, lsr_config_from(cfg, channels), tc, cfg.seed(), &log);
    model.save((out / "lsr.lta").string());
    manifest.add("lsr.lta");
    std::cout << "train-lsr: val L1 " << model.final_val_l1 << ", consistency bound "
              << model.consistency_bound << "\n";

    std::vector<std::pair<double, double>> pts;
    for (const auto& e : log) pts.emplace_back(e.iteration, e.loss);
    plot_training_log(pts, "lsr", (out / "lsr_loss.png").string());
    manifest.add("lsr_loss.png");
    manifest.write();
    return 0;
}

int cmd_train_denoiser(const Common& c) {
    auto cfg = resolve(c);
    auto manifest = start_run(cfg);
    const fs::path out = manifest.out_dir;

    auto arch = TensorArchive::load((out / "base.lta").string());
    const Tensor& labels = arch.get("labels");
    std::vector<refgen::LabeledLatent> dataset;
    for (int i = 0; i < labels.channels; ++i) {
        char key[32];
        std::snprintf(key, sizeof(key), "z%04d", i);
        dataset.push_back({arch.get(key), static_cast<int>(labels.data[i])});
    }

    refgen::DenoiserConfig dc;
    dc.channels = dataset.front().latent.channels;
    dc.width = cfg.integer("denoiser.width");
    dc.depth = cfg.integer("denoiser.depth");
    dc.time_dim = cfg.integer("denoiser.time_dim");
    dc.n_classes = cfg.integer("data.classes");

    refgen::DenoiserTrainConfig tc;
    tc.iterations = cfg.integer("denoiser.train.iterations");
    tc.batch_size = cfg.integer("denoiser.train.batch");
    tc.lr = static_cast<float>(cfg.num("denoiser.train.lr"));

    std::vector<refgen::DenoiserTrainLogEntry> log;
    auto model = refgen::train_toy_denoiser(dataset, schedule_from(cfg), dc, tc,
                                            cfg.seed(), &log);
    model.save((out / "denoiser.lta").string());
    manifest.add("denoiser.lta");
    std::cout << "train-denoiser: final loss " << (log.empty() ? 0.f : log.back().loss)
              << "\n";

    std::vector<std::pair<double, double>> pts;
    for (const auto& e : log) pts.emplace_back(e.iteration, e.loss);
    plot_training_log(pts, "denoiser", (out / "denoiser_loss.png").string());
    manifest.add("denoiser_loss.png");
    manifest.write();
    return 0;
}

struct LoadedPipeline {
    codec::Codec cdc;
    lsr::LsrModel lsr_model;
    refgen::ToyDenoiser denoiser;
    refgen::PipelineContext ctx;
};

LoadedPipeline load_pipeline(const cli::RunConfig& cfg) {
    const fs::path out = cfg.str("out_dir");
    LoadedPipeline p{make_codec(cfg), {}, {}, {}};
    p.ctx.codec = &p.cdc;
    if (fs::exists(out / "lsr.lta")) {
        p.lsr_model = lsr::LsrModel::load((out / "lsr.lta").string());
        p.ctx.lsr_model = &p.lsr_model;
    }
    p.denoiser = refgen::ToyDenoiser::load((out / "denoiser.lta").string());
    p.ctx.schedule = schedule_from(cfg);
    p.ctx.guidance = guidance_from(cfg);
    p.ctx.rna = rna_config_from(cfg);
    p.ctx.patch_size = cfg.integer("generate.patch_size");
    p.ctx.patch_stride = cfg.integer("generate.patch_stride");
    return p;
}

int cmd_generate(const Common& c) {
    auto cfg = resolve(c);
    auto manifest = start_run(cfg);
    const fs::path out = manifest.out_dir;

    auto p = load_pipeline(cfg);
    const int count = cfg.integer("generate.count");
    const float scale = static_cast<float>(cfg.num("generate.scale"));
    const int base = cfg.integer("generate.base_size");
    const int fixed_label = cfg.integer("generate.label");
    const int classes = cfg.integer("data.classes");

    fs::create_directories(out / "generated");
    for (int i = 0; i < count; ++i) {
        const int label = fixed_label >= 0 ? fixed_label : i % classes;
        p.ctx.predictor = p.denoiser.as_predictor(label);
        RgbImage img = refgen::lsrna_generate(label, scale, p.denoiser, base, base,
                                              p.ctx, mix_seed(cfg.seed(), 0x6E17u + i));
        char buf[48];
        std::snprintf(buf, sizeof(buf), "gen_c%d_%03d.png", label, i);
        write_png((out / "generated" / buf).string(), img);
        manifest.add(std::string("generated/") + buf);
        std::cout << "generate: wrote " << buf << "\n";
    }
    manifest.write();
    return 0;
}

// Shared by the sweeps: generate `count` images at the current ctx
// settings and score them against prepared reference images.
metrics::MetricReport sweep_point(LoadedPipeline& p, const cli::RunConfig& cfg,
                                  const std::vector<RgbImage>& reference, int count,
                                  uint64_t seed) {
    const float scale = static_cast<float>(cfg.num("generate.scale"));
    const int base = cfg.integer("generate.base_size");
    const int classes = cfg.integer("data.classes");
    std::vector<RgbImage> generated;
    for (int i = 0; i < count; ++i) {
        const int label = i % classes;
        p.ctx.predictor = p.denoiser.as_predictor(label);
        generated.push_back(refgen::lsrna_generate(label, scale, p.denoiser, base, base,
                                                   p.ctx, mix_seed(seed, 0x57EE + i)));
    }
    return metrics::evaluate_images(generated, reference, embedder_from(cfg),
                                    protocol_from(cfg));
}

int cmd_sweep_rna(const Common& c) {
    auto cfg = resolve(c);
    auto manifest = start_run(cfg);
    const fs::path out = manifest.out_dir;

    auto p = load_pipeline(cfg);
    auto reference = load_images(cfg, nullptr, nullptr);
    const int count = cfg.integer("generate.count");

    std::vector<double> e_values = {0.0, 0.4, 0.8, 1.2, 1.6};
    json results = json::array();
    plot::Series s;
    s.label = "pfid";
    for (double e : e_values) {
        p.ctx.rna.e_max = static_cast<float>(e);
        p.ctx.rna.e_min = std::min(p.ctx.rna.e_min, p.ctx.rna.e_max);
        auto rep = sweep_point(p, cfg, reference, count, mix_seed(cfg.seed(), 0xE5));
        results.push_back({{"e_max", e}, {"pfid", rep.pfid}, {"pkid", rep.pkid},
                           {"fid", rep.fid}, {"kid", rep.kid}});
        s.xs.push_back(e);
        s.ys.push_back(rep.pfid);
        std::cout << "sweep-rna: e_max=" << e << " pFID=" << rep.pfid
                  << " pKID=" << rep.pkid << "\n";
    }
    std::ofstream(out / "sweep_rna.json") << results.dump(2) << "\n";
    manifest.add("sweep_rna.json");
    plot::render_chart({s}, "pfid", (out / "sweep_rna.png").string());
    manifest.add("sweep_rna.png");
    manifest.write();
    return 0;
}

int cmd_sweep_steps(const Common& c) {
    auto cfg = resolve(c);
    auto manifest = start_run(cfg);
    const fs::path out = manifest.out_dir;

    auto p = load_pipeline(cfg);
    auto reference = load_images(cfg, nullptr, nullptr);
    const int count = cfg.integer("generate.count");

    std::vector<int> step_values = {10, 20, 30, 50};
    json results = json::array();
    plot::Series lsr_s, bic_s;
    lsr_s.label = "lsr";
    bic_s.label = "bicubic";
    bic_s.r = 0.2f; bic_s.g = 0.2f; bic_s.b = 0.8f;
    for (int steps : step_values) {
        p.ctx.guidance.steps = steps;
        p.ctx.guidance.upsample_mode = refgen::UpsampleMode::Lsr;
        auto rep_lsr = sweep_point(p, cfg, reference, count, mix_seed(cfg.seed(), 0x511));
        p.ctx.guidance.upsample_mode = refgen::UpsampleMode::LatentBicubic;
        auto rep_bic = sweep_point(p, cfg, reference, count, mix_seed(cfg.seed(), 0x512));
        results.push_back({{"steps", steps},
                           {"lsr_pfid", rep_lsr.pfid},
                           {"bicubic_pfid", rep_bic.pfid}});
        lsr_s.xs.push_back(steps);
        lsr_s.ys.push_back(rep_lsr.pfid);
        bic_s.xs.push_back(steps);
        bic_s.ys.push_back(rep_bic.pfid);
        std::cout << "sweep-steps: steps=" << steps << " lsr pFID=" << rep_lsr.pfid
                  << " bicubic pFID=" << rep_bic.pfid << "\n";
    }
    std::ofstream(out / "sweep_steps.json") << results.dump(2) << "\n";
    manifest.add("sweep_steps.json");
    plot::render_chart({lsr_s, bic_s}, "pfid", (out / "sweep_steps.png").string());
    manifest.add("sweep_steps.png");
    manifest.write();
    return 0;
}

int cmd_edge_viz(const Common& c, const std::string& image_path) {
    auto cfg = resolve(c);
    auto manifest = start_run(cfg);
    const fs::path out = manifest.out_dir;

    RgbImage img;
    if (!image_path.empty()) {
        img = read_png(image_path);
    } else {
        img = dataprep::synthesize_desk_image(0, cfg.integer("data.image_size"),
                                              mix_seed(cfg.seed(), 0x1000u));
    }
    auto rc = rna_config_from(cfg);
    auto edges = rna::canny_edges(img, rc);
    const int s = cfg.integer("codec.s");
    auto density = rna::pool_edge_map(edges, img.height / s, img.width / s);
    auto scales = rna::noise_scale_map(density, rc);

    write_png((out / "edge_input.png").string(), img);
    write_png_gray((out / "edge_map.png").string(), edges);
    write_png_gray((out / "edge_density.png").string(), density);
    Tensor scale_viz = scaled(scales, rc.e_max > 0 ? 1.0f / rc.e_max : 1.0f);
    write_png_gray((out / "noise_scale.png").string(), scale_viz);
    for (const char* f : {"edge_input.png", "edge_map.png", "edge_density.png",
                          "noise_scale.png"})
        manifest.add(f);
    manifest.write();
    std::cout << "edge-viz: wrote maps to " << out << "\n";
    return 0;
}

int cmd_eval(const Common& c, const std::string& generated_dir,
             const std::string& reference_dir) {
    auto cfg = resolve(c);
    auto manifest = start_run(cfg);
    const fs::path out = manifest.out_dir;

    auto report = metrics::evaluate_set(generated_dir, reference_dir,
                                        embedder_from(cfg), protocol_from(cfg));
    report.config_hash = cfg.hash();
    std::ofstream(out / "metrics.json") << report.to_json() << "\n";
    manifest.add("metrics.json");
    manifest.write();
    std::cout << report.to_json() << "\n";
    return 0;
}

int cmd_report(const std::string& dir) {
    std::string problem;
    if (cli::RunManifest::verify(dir, &problem)) {
        std::cout << "report: " << dir << " OK\n";
        return 0;
    }
    std::cerr << "report: " << dir << " INCOMPLETE: " << problem << "\n";
    return 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"latent-space super-resolution + region-wise noise pipeline"};
    app.require_subcommand(1);

    Common c_prep, c_tc, c_tl, c_td, c_gen, c_srna, c_ssteps, c_viz, c_eval;
    std::string viz_image, eval_gen, eval_ref, report_dir;

    add_common(app.add_subcommand("prep", "build the pair dataset and base latents"), c_prep);
    add_common(app.add_subcommand("train-codec", "train the tiny autoencoder"), c_tc);
    add_common(app.add_subcommand("train-lsr", "train the latent upsampler"), c_tl);
    add_common(app.add_subcommand("train-denoiser", "train the reference generator"), c_td);
    add_common(app.add_subcommand("generate", "guided generation"), c_gen);
    add_common(app.add_subcommand("sweep-rna", "sweep e_max against patch metrics"), c_srna);
    add_common(app.add_subcommand("sweep-steps", "step-count sweep, lsr vs bicubic"), c_ssteps);
    auto* viz = app.add_subcommand("edge-viz", "edge map / noise scale visualization");
    add_common(viz, c_viz);
    viz->add_option("--image", viz_image, "input PNG (default: synthetic sample)");
    auto* ev = app.add_subcommand("eval", "score generated vs reference images");
    add_common(ev, c_eval);
    ev->add_option("--generated", eval_gen, "directory of generated PNGs")->required();
    ev->add_option("--reference", eval_ref, "directory of reference PNGs")->required();
    auto* rep = app.add_subcommand("report", "verify a run directory's manifest");
    rep->add_option("dir", report_dir, "run directory")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (app.got_subcommand("prep")) return cmd_prep(c_prep);
        if (app.got_subcommand("train-codec")) return cmd_train_codec(c_tc);
        if (app.got_subcommand("train-lsr")) return cmd_train_lsr(c_tl);
        if (app.got_subcommand("train-denoiser")) return cmd_train_denoiser(c_td);
        if (app.got_subcommand("generate")) return cmd_generate(c_gen);
        if (app.got_subcommand("sweep-rna")) return cmd_sweep_rna(c_srna);
        if (app.got_subcommand("sweep-steps")) return cmd_sweep_steps(c_ssteps);
        if (app.got_subcommand("edge-viz")) return cmd_edge_viz(c_viz, viz_image);
        if (app.got_subcommand("eval")) return cmd_eval(c_eval, eval_gen, eval_ref);
        if (app.got_subcommand("report")) return cmd_report(report_dir);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}

#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "lsrna/config.hpp"

using namespace lsrna::cli;
namespace fs = std::filesystem;

TEST_CASE("defaults carry the pinned values") {
    auto cfg = RunConfig::from_overrides({});
    CHECK(cfg.num("rna.e_min") == 0.0);
    CHECK(cfg.num("rna.e_max") == doctest::Approx(1.2));
    CHECK(cfg.integer("guidance.steps") == 30);
    CHECK(cfg.num("lsr.train.lr") == doctest::Approx(2e-4));
    CHECK(cfg.integer("lsr.train.batch") == 32);
    CHECK(cfg.integer("lsr.train.lr_crop") == 32);
    CHECK(cfg.integer("lsr.train.hr_samples") == 4096);
    CHECK(cfg.num("rna.canny_low") == 0.0);
    CHECK(cfg.num("rna.canny_high") == 255.0);
}

TEST_CASE("dotted overrides are applied last") {
    auto cfg = RunConfig::from_overrides({"rna.e_max=0.8", "guidance.steps=10", "seed=77"});
    CHECK(cfg.num("rna.e_max") == doctest::Approx(0.8));
    CHECK(cfg.integer("guidance.steps") == 10);
    CHECK(cfg.seed() == 77);
}

TEST_CASE("unknown fields and type conflicts fail naming the path") {
    CHECK_THROWS_WITH_AS(RunConfig::from_overrides({"rna.e_maxx=0.8"}),
                         doctest::Contains("rna.e_maxx"), std::runtime_error);
    CHECK_THROWS_WITH_AS(RunConfig::from_overrides({"rna.e_max=hello"}),
                         doctest::Contains("rna.e_max"), std::runtime_error);
    CHECK_THROWS(RunConfig::from_overrides({"no_equals_sign"}));
}

TEST_CASE("config files merge over defaults and are validated") {
    const auto p = (fs::temp_directory_path() / "lsrna_cfg_test.json").string();
    std::ofstream(p) << R"({"rna": {"e_max": 0.4}, "seed": 9})";
    auto cfg = RunConfig::load(p, {});
    CHECK(cfg.num("rna.e_max") == doctest::Approx(0.4));
    CHECK(cfg.seed() == 9);
    CHECK(cfg.num("rna.e_min") == 0.0);  // untouched default
    fs::remove(p);

    const auto bad = (fs::temp_directory_path() / "lsrna_cfg_bad.json").string();
    std::ofstream(bad) << R"({"rnaa": {}})";
    CHECK_THROWS_WITH_AS(RunConfig::load(bad, {}), doctest::Contains("rnaa"),
                         std::runtime_error);
    fs::remove(bad);
}

TEST_CASE("hash is stable and config-sensitive") {
    auto a = RunConfig::from_overrides({});
    auto b = RunConfig::from_overrides({});
    CHECK(a.hash() == b.hash());
    auto c = RunConfig::from_overrides({"rna.e_max=0.9"});
    CHECK(a.hash() != c.hash());
}

TEST_CASE("manifest round-trip and completeness check") {
    const auto dir = (fs::temp_directory_path() / "lsrna_manifest_test").string();
    fs::remove_all(dir);
    auto cfg = RunConfig::from_overrides({std::string("out_dir=") + dir});
    cfg.echo_to(dir);

    RunManifest m;
    m.out_dir = dir;
    m.seed = cfg.seed();
    m.config_hash = cfg.hash();
    std::ofstream(fs::path(dir) / "artifact.txt") << "x";
    m.add("artifact.txt");
    m.write();

    std::string problem;
    CHECK(RunManifest::verify(dir, &problem));
    CHECK(problem.empty());

    // A listed-but-missing file must fail the check.
    fs::remove(fs::path(dir) / "artifact.txt");
    CHECK_FALSE(RunManifest::verify(dir, &problem));
    CHECK(problem.find("artifact.txt") != std::string::npos);
    fs::remove_all(dir);
}

TEST_CASE("verify rejects directories without a manifest") {
    const auto dir = (fs::temp_directory_path() / "lsrna_manifest_none").string();
    fs::create_directories(dir);
    CHECK_FALSE(RunManifest::verify(dir, nullptr));
    fs::remove_all(dir);
}

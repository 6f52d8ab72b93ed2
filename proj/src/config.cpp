#include "lsrna/config.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace fs = std::filesystem;
using nlohmann::json;

namespace lsrna::cli {

json RunConfig::defaults() {
    return json{
        {"seed", 1234},
        {"out_dir", "runs/default"},
        {"data",
         {{"dir", ""},  // empty: synthesize the desk dataset
          {"synthetic_count", 12},
          {"image_size", 128},
          {"classes", 3}}},
        {"codec",
         {{"backend", "invertible-mock"},
          {"s", 4},
          {"channels", 48},
          {"train",
           {{"iterations", 400}, {"batch", 8}, {"lr", 2e-3}, {"crop", 32}}}}},
        {"dataprep",
         {{"crop_min", 96},
          {"crop_max", 160},
          {"crop_quantum", 16},
          {"factors", json::array({2, 4})},
          {"min_source_resolution", 96},
          {"max_crops_per_image", 0}}},
        {"lsr",
         {{"backbone", "residual-conv"},
          {"depth", 3},
          {"width", 24},
          {"feature_dim", 24},
          {"window", 8},
          {"mlp_widths", json::array({64, 64})},
          {"train",
           {{"iterations", 1000},
            {"batch", 32},
            {"lr", 2e-4},
            {"lr_crop", 32},
            {"hr_samples", 4096}}}}},
        {"rna",
         {{"e_min", 0.0},
          {"e_max", 1.2},
          {"canny_low", 0.0},
          {"canny_high", 255.0},
          {"blur_sigma", 1.4}}},
        {"diffusion", {{"total_steps", 1000}, {"beta_start", 1e-4}, {"beta_end", 0.02}}},
        {"guidance",
         {{"steps", 30},
          {"eta", 0.0},
          {"t_init", -1},
          {"target_alpha_cum", 0.5},
          {"blend_exponent", 1.0},
          {"upsample_mode", "lsr"}}},
        {"denoiser",
         {{"width", 24},
          {"depth", 2},
          {"time_dim", 32},
          {"train", {{"iterations", 1500}, {"batch", 8}, {"lr", 2e-3}, {"size", 16}}}}},
        {"generate",
         {{"scale", 2.0},
          {"count", 8},
          {"base_size", 16},
          {"label", -1},
          {"patch_size", 16},
          {"patch_stride", 8}}},
        {"metrics",
         {{"patch_size", 32},
          {"num_patches", 256},
          {"patch_seed", 0x9A7C},
          {"embedder",
           {{"backend", "fixed-random-projection"},
            {"input_size", 32},
            {"hidden_dim", 192},
            {"feature_dim", 48},
            {"seed", 0x5EED},
            {"feature_file", ""}}}}},
    };
}

namespace {

// Structural merge: every key in `user` must exist in `base` with a
// compatible type, so typos and conflicting overrides fail loudly with the
// offending field path.
void merge_checked(json& base, const json& user, const std::string& prefix) {
    if (!user.is_object()) {
        throw std::runtime_error("config: expected object at '" +
                                 (prefix.empty() ? "<root>" : prefix) + "'");
    }
    for (auto it = user.begin(); it != user.end(); ++it) {
        const std::string path = prefix.empty() ? it.key() : prefix + "." + it.key();
        if (!base.contains(it.key())) {
            throw std::runtime_error("config: unknown field '" + path + "'");
        }
        json& slot = base[it.key()];
        const json& val = it.value();
        if (slot.is_object()) {
            merge_checked(slot, val, path);
        } else {
            const bool both_numeric = slot.is_number() && val.is_number();
            if (!both_numeric && slot.type() != val.type()) {
                throw std::runtime_error("config: type mismatch at '" + path +
                                         "' (expected " + std::string(slot.type_name()) +
                                         ", got " + std::string(val.type_name()) + ")");
            }
            slot = val;
        }
    }
}

void apply_override(json& base, const std::string& expr) {
    auto eq = expr.find('=');
    if (eq == std::string::npos) {
        throw std::runtime_error("override must look like path.to.field=value: " + expr);
    }
    const std::string path = expr.substr(0, eq);
    const std::string raw = expr.substr(eq + 1);
    json value;
    try {
        value = json::parse(raw);
    } catch (const json::parse_error&) {
        value = raw;  // bare strings need no quoting on the command line
    }
    // Build a nested single-key object and run it through the same checker.
    json nested = value;
    std::vector<std::string> parts;
    std::stringstream ss(path);
    std::string part;
    while (std::getline(ss, part, '.')) parts.push_back(part);
    if (parts.empty()) throw std::runtime_error("override has empty path: " + expr);
    for (auto it = parts.rbegin(); it != parts.rend(); ++it) {
        nested = json{{*it, nested}};
    }
    merge_checked(base, nested, "");
}

}  // namespace

RunConfig RunConfig::load(const std::string& path, const std::vector<std::string>& overrides) {
    json tree = defaults();
    if (!path.empty()) {
        std::ifstream in(path);
        if (!in) throw std::runtime_error("cannot open config file: " + path);
        json user;
        in >> user;
        merge_checked(tree, user, "");
    }
    for (const auto& ov : overrides) apply_override(tree, ov);
    return RunConfig{std::move(tree)};
}

RunConfig RunConfig::from_overrides(const std::vector<std::string>& overrides) {
    return load("", overrides);
}

const json& RunConfig::at(const std::string& dotted_path) const {
    const json* node = &tree;
    std::stringstream ss(dotted_path);
    std::string part;
    while (std::getline(ss, part, '.')) {
        if (!node->is_object() || !node->contains(part)) {
            throw std::runtime_error("config: missing field '" + dotted_path + "'");
        }
        node = &node->at(part);
    }
    return *node;
}

uint64_t fnv1a(const std::string& s) {
    uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string RunConfig::hash() const {
    char buf[20];
    std::snprintf(buf, sizeof(buf), "%016llx",
                  static_cast<unsigned long long>(fnv1a(tree.dump())));
    return buf;
}

void RunConfig::echo_to(const std::string& dir) const {
    fs::create_directories(dir);
    std::ofstream out(fs::path(dir) / "config.resolved.json");
    out << tree.dump(2) << "\n";
}

void RunManifest::write() const {
    fs::create_directories(out_dir);
    json j{{"seed", seed},
           {"config_hash", config_hash},
           {"source_hash", LSRNA_SOURCE_HASH},
           {"files", files}};
    std::ofstream out(fs::path(out_dir) / "manifest.json");
    out << j.dump(2) << "\n";
}

bool RunManifest::verify(const std::string& dir, std::string* problem) {
    auto fail = [&](const std::string& why) {
        if (problem) *problem = why;
        return false;
    };
    fs::path mf = fs::path(dir) / "manifest.json";
    if (!fs::exists(mf)) return fail("missing manifest.json");
    json j;
    {
        std::ifstream in(mf);
        if (!in) return fail("cannot read manifest.json");
        in >> j;
    }
    for (const char* key : {"seed", "config_hash", "source_hash", "files"}) {
        if (!j.contains(key)) return fail(std::string("manifest missing key ") + key);
    }
    for (const auto& f : j.at("files")) {
        fs::path p = fs::path(dir) / f.get<std::string>();
        if (!fs::exists(p)) return fail("manifest lists missing file " + f.get<std::string>());
    }
    if (!fs::exists(fs::path(dir) / "config.resolved.json")) {
        return fail("missing config.resolved.json");
    }
    if (problem) problem->clear();
    return true;
}

}  // namespace lsrna::cli

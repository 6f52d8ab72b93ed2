#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

namespace lsrna::cli {

// Resolved run configuration: defaults, overlaid with a config file,
// overlaid with dotted-path CLI overrides. Hash-stable; every run echoes
// its resolved form next to its outputs.
struct RunConfig {
    nlohmann::json tree;

    static nlohmann::json defaults();
    static RunConfig load(const std::string& path,
                          const std::vector<std::string>& overrides);
    static RunConfig from_overrides(const std::vector<std::string>& overrides);

    const nlohmann::json& at(const std::string& dotted_path) const;
    double num(const std::string& dotted_path) const { return at(dotted_path).get<double>(); }
    int integer(const std::string& dotted_path) const { return at(dotted_path).get<int>(); }
    std::string str(const std::string& dotted_path) const {
        return at(dotted_path).get<std::string>();
    }
    uint64_t seed() const { return tree.at("seed").get<uint64_t>(); }

    std::string hash() const;
    void echo_to(const std::string& dir) const;
};

// Every output directory records its resolved config, seed, source hash
// and the list of produced files; `verify` checks completeness.
struct RunManifest {
    std::string out_dir;
    uint64_t seed = 0;
    std::string config_hash;
    std::vector<std::string> files;

    void add(const std::string& relative_path) { files.push_back(relative_path); }
    void write() const;
    static bool verify(const std::string& dir, std::string* problem = nullptr);
};

uint64_t fnv1a(const std::string& s);

}  // namespace lsrna::cli

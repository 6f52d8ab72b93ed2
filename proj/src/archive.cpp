#include "lsrna/archive.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>

#include <json.hpp>

namespace lsrna {

static const char kMagic[8] = {'L', 'S', 'R', 'N', 'A', 'T', 'A', '1'};

void TensorArchive::put(const std::string& name, const Tensor& t) {
    entries_[name] = t;
}

const Tensor& TensorArchive::get(const std::string& name) const {
    auto it = entries_.find(name);
    if (it == entries_.end())
        throw std::runtime_error("TensorArchive: missing entry '" + name + "'");
    return it->second;
}

bool TensorArchive::contains(const std::string& name) const {
    return entries_.count(name) > 0;
}

void TensorArchive::save(const std::string& path) const {
    nlohmann::json header = nlohmann::json::array();
    uint64_t offset = 0;
    for (const auto& [name, t] : entries_) {
        header.push_back({{"name", name},
                          {"dtype", "f32"},
                          {"shape", {t.height, t.width, t.channels}},
                          {"offset", offset}});
        offset += t.data.size() * sizeof(float);
    }
    const std::string header_str = header.dump();

    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("TensorArchive: cannot open for write: " + path);
    f.write(kMagic, sizeof(kMagic));
    uint64_t hlen = header_str.size();
    f.write(reinterpret_cast<const char*>(&hlen), sizeof(hlen));
    f.write(header_str.data(), static_cast<std::streamsize>(hlen));
    for (const auto& [name, t] : entries_)
        f.write(reinterpret_cast<const char*>(t.data.data()),
                static_cast<std::streamsize>(t.data.size() * sizeof(float)));
    if (!f) throw std::runtime_error("TensorArchive: write failed: " + path);
}

TensorArchive TensorArchive::load(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("TensorArchive: cannot open: " + path);
    char magic[8];
    f.read(magic, sizeof(magic));
    if (!f || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
        throw std::runtime_error("TensorArchive: bad magic in " + path);
    uint64_t hlen = 0;
    f.read(reinterpret_cast<char*>(&hlen), sizeof(hlen));
    std::string header_str(hlen, '\0');
    f.read(header_str.data(), static_cast<std::streamsize>(hlen));
    nlohmann::json header = nlohmann::json::parse(header_str);

    TensorArchive out;
    for (const auto& entry : header) {
        const std::string name = entry.at("name");
        if (entry.at("dtype") != "f32")
            throw std::runtime_error("TensorArchive: unsupported dtype");
        auto shape = entry.at("shape");
        Tensor t(shape.at(0).get<int>(), shape.at(1).get<int>(), shape.at(2).get<int>());
        f.read(reinterpret_cast<char*>(t.data.data()),
               static_cast<std::streamsize>(t.data.size() * sizeof(float)));
        if (!f) throw std::runtime_error("TensorArchive: truncated data in " + path);
        out.entries_[name] = std::move(t);
    }
    return out;
}

}  // namespace lsrna

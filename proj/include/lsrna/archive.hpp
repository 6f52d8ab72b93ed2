#pragma once

#include <map>
#include <string>

#include "lsrna/tensor.hpp"

namespace lsrna {

// Self-describing tensor container: magic, u64 header length, JSON header
// listing (name, dtype, shape, offset), then raw little-endian f32 data.
// Round-trips bitwise; used for weights, latent shards and feature files.
class TensorArchive {
public:
    void put(const std::string& name, const Tensor& t);
    const Tensor& get(const std::string& name) const;
    bool contains(const std::string& name) const;
    const std::map<std::string, Tensor>& entries() const { return entries_; }

    void save(const std::string& path) const;
    static TensorArchive load(const std::string& path);

private:
    std::map<std::string, Tensor> entries_;
};

}  // namespace lsrna

#pragma once

#include <cstdint>
#include <random>

#include "lsrna/tensor.hpp"

namespace lsrna {

// All randomness in the project flows through this wrapper so that a
// (seed, call sequence) pair replays bitwise on the same build.
class Rng {
public:
    explicit Rng(uint64_t seed) : engine_(seed) {}

    uint64_t next_u64() { return engine_(); }

    // Uniform integer in [0, n).
    int uniform_int(int n) {
        std::uniform_int_distribution<int> d(0, n - 1);
        return d(engine_);
    }

    float uniform() {
        std::uniform_real_distribution<float> d(0.0f, 1.0f);
        return d(engine_);
    }

    float normal() {
        std::normal_distribution<float> d(0.0f, 1.0f);
        return d(engine_);
    }

    Tensor normal_tensor(int h, int w, int c) {
        Tensor t(h, w, c);
        for (float& v : t.data) v = normal();
        return t;
    }

    // Derive an independent stream; used to give parallel work items
    // their own seeds.
    uint64_t derive(uint64_t salt) {
        uint64_t x = engine_() ^ (salt * 0x9E3779B97F4A7C15ull);
        x ^= x >> 33;
        x *= 0xFF51AFD7ED558CCDull;
        x ^= x >> 33;
        return x;
    }

    std::mt19937_64& engine() { return engine_; }

private:
    std::mt19937_64 engine_;
};

// Stateless seed mixing for deriving per-item seeds without consuming
// the parent stream.
inline uint64_t mix_seed(uint64_t seed, uint64_t salt) {
    uint64_t x = seed + 0x9E3779B97F4A7C15ull * (salt + 1);
    x ^= x >> 30;
    x *= 0xBF58476D1CE4E5B9ull;
    x ^= x >> 27;
    x *= 0x94D049BB133111EBull;
    x ^= x >> 31;
    return x;
}

}  // namespace lsrna

#pragma once

#include <memory>
#include <string>
#include <vector>

#include "lsrna/nn.hpp"
#include "lsrna/rng.hpp"
#include "lsrna/tensor.hpp"

namespace lsrna::codec {

enum class Backend { InvertibleMock, LearnedTiny };

struct CodecSpec {
    int s = 8;        // spatial compression ratio
    int channels = 4; // latent channel count
    Backend backend = Backend::LearnedTiny;

    static CodecSpec invertible_mock(int s) { return {s, 3 * s * s, Backend::InvertibleMock}; }
    static CodecSpec learned_tiny(int s = 8, int channels = 4) {
        return {s, channels, Backend::LearnedTiny};
    }
    void validate() const;
};

// Small strided convolutional autoencoder. s must be a power of two.
class TinyAutoencoder {
public:
    TinyAutoencoder() = default;
    TinyAutoencoder(int s, int latent_channels, int width, uint64_t init_seed);

    LatentGrid encode(const RgbImage& image);
    RgbImage decode(const LatentGrid& latent);  // output clamped to [0,1]

    nn::ParamRefs params();
    void save(const std::string& path) const;
    static TinyAutoencoder load(const std::string& path);

    int s() const { return s_; }
    int latent_channels() const { return latent_channels_; }
    int width() const { return width_; }
    // Final validation reconstruction MAE recorded by train_codec.
    float val_error = -1.0f;

    // Training-path entry points (encode/decode plus backward).
    RgbImage forward_train(const RgbImage& image);
    void backward(const Tensor& d_recon);

private:
    int s_ = 0, latent_channels_ = 0, width_ = 0, n_down_ = 0;
    std::vector<nn::Conv2d> enc_convs_;
    std::vector<nn::ReLU> enc_act_;
    nn::Conv2d enc_out_;
    nn::Conv2d dec_in_;
    nn::ReLU dec_in_act_;
    std::vector<nn::Conv2d> dec_convs_;
    std::vector<nn::ReLU> dec_act_;
    nn::Conv2d dec_out_;
    nn::Sigmoid dec_sigmoid_;
};

// Image <-> latent conversion front end. The invertible mock is
// space-to-depth by factor s followed by a fixed signed channel
// permutation (orthonormal, exact in float), so decode(encode(x)) == x
// bitwise. The learned backend wraps a TinyAutoencoder.
class Codec {
public:
    explicit Codec(CodecSpec spec);                         // invertible mock
    Codec(CodecSpec spec, TinyAutoencoder autoencoder);     // learned tiny

    LatentGrid encode(const RgbImage& image);
    RgbImage decode(const LatentGrid& latent);

    const CodecSpec& spec() const { return spec_; }
    TinyAutoencoder& autoencoder();

private:
    CodecSpec spec_;
    std::vector<int> perm_;       // channel permutation
    std::vector<float> sign_;     // +-1 per channel
    std::unique_ptr<TinyAutoencoder> ae_;
};

struct CodecTrainConfig {
    int iterations = 2000;
    int batch_size = 8;
    float lr = 1e-3f;
    int image_size = 64;    // training crop size (divisible by s)
    int log_every = 100;
};

struct TrainLogEntry {
    int iteration;
    float loss;
    float lr;
};

// Reconstruction training on random crops of the given images. Returns
// the trained model with val_error set to the final validation MAE.
TinyAutoencoder train_codec(const std::vector<RgbImage>& images, const CodecSpec& spec,
                            const CodecTrainConfig& cfg, uint64_t seed,
                            std::vector<TrainLogEntry>* log = nullptr);

}  // namespace lsrna::codec

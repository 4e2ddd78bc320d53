#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "adverin/image.hpp"
#include "adverin/rng.hpp"

namespace adverin {

// Convolution parameters, weights laid out (out_ch, in_ch, ky, kx).
struct ConvParam {
    int out_ch = 0;
    int in_ch = 0;
    int ksize = 0;
    std::vector<double> w;
    std::vector<double> b;

    static ConvParam zeros(int out_ch, int in_ch, int ksize);
};

// The five trainable tensors, iterated everywhere in this fixed order:
// enc1a, enc1b, enc2, fuse, head (weights before biases). The same struct
// shape carries gradients and optimizer velocity.
struct NetParams {
    ConvParam enc1a;  // 3x3, 1 -> 8
    ConvParam enc1b;  // 3x3, 8 -> 8
    ConvParam enc2;   // 3x3, 8 -> 16
    ConvParam fuse;   // 3x3, 24 -> 8
    ConvParam head;   // 1x1, 8 -> C

    template <typename Fn>
    void for_each_tensor(Fn&& fn) {
        fn(enc1a.w); fn(enc1a.b);
        fn(enc1b.w); fn(enc1b.b);
        fn(enc2.w);  fn(enc2.b);
        fn(fuse.w);  fn(fuse.b);
        fn(head.w);  fn(head.b);
    }
    template <typename Fn>
    void for_each_tensor(Fn&& fn) const {
        fn(enc1a.w); fn(enc1a.b);
        fn(enc1b.w); fn(enc1b.b);
        fn(enc2.w);  fn(enc2.b);
        fn(fuse.w);  fn(fuse.b);
        fn(head.w);  fn(head.b);
    }
};

// Tiny skip-connected fully-convolutional segmentation network:
//   enc1a -> ReLU -> enc1b -> ReLU (skip) -> avgpool2 -> enc2 -> ReLU
//   -> nearest upsample x2 -> concat(up, skip) -> fuse -> ReLU
//   -> head 1x1 -> sigmoid.
// Sigmoid heads make the channels independent binary problems, which is
// what nested classes (cup inside disc) need.
struct SegNet {
    NetParams params;
    int channels = 1;
};

struct Prediction {
    int channels = 0;
    int height = 0;
    int width = 0;
    std::vector<double> probs;  // channels*height*width, in (0, 1)

    double at(int c, int y, int x) const {
        return probs[(static_cast<std::size_t>(c) * height + y) * width + x];
    }
};

struct LossGrads {
    double loss = 0.0;
    NetParams d_theta;
    std::vector<double> d_input;  // height*width
};

// Loss + activation-pattern digest from a forward pass only. The digest
// hashes the sign pattern of every ReLU input and the BCE clamp state;
// two finite-difference probes are comparable only when their digests
// match (otherwise the probe straddled a kink and measures nothing).
struct LossProbe {
    double loss = 0.0;
    std::uint64_t pattern = 0;
};

// Weights uniform in [-a, a] with a = sqrt(1/fan_in), biases zero.
// Tensors are drawn in the fixed for_each_tensor order.
SegNet init_segnet(Rng& rng, int channels);

NetParams zeros_like(const SegNet& net);

// Image dims must be even (one pooling level).
Prediction forward(const SegNet& net, const Image2D& image);

// L = mean-over-channels soft Dice loss (eps = 1e-5) + mean binary
// cross-entropy (probs clamped to [1e-7, 1-1e-7] before the logs), with
// exact reverse-mode gradients for every parameter and the input image.
// want_param_grads=false leaves d_theta zero and skips its accumulation.
LossGrads loss_and_grads(const SegNet& net, const Image2D& image, const MaskChannels& truth,
                         bool want_param_grads = true);

LossProbe loss_probe(const SegNet& net, const Image2D& image, const MaskChannels& truth);

// v <- momentum*v + d; theta <- theta - lr*v, elementwise in the fixed
// tensor order.
void sgd_update(SegNet& net, const NetParams& d_theta, double lr, double momentum,
                NetParams& velocity);

struct Checkpoint {
    SegNet net;
    int n_points = 10;
    double delta = 2.0;
};

void save_checkpoint(const std::string& path, const SegNet& net, int n_points, double delta);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace adverin

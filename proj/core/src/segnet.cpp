#include "adverin/segnet.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "adverin/container.hpp"

namespace adverin {

namespace {

constexpr double kDiceEps = 1e-5;
constexpr double kProbClampLo = 1e-7;
constexpr double kProbClampHi = 1.0 - 1e-7;

struct FeatureMap {
    int c = 0;
    int h = 0;
    int w = 0;
    std::vector<double> v;

    double* channel(int ci) { return v.data() + static_cast<std::size_t>(ci) * h * w; }
    const double* channel(int ci) const {
        return v.data() + static_cast<std::size_t>(ci) * h * w;
    }
};

FeatureMap make_map(int c, int h, int w) {
    return {c, h, w, std::vector<double>(static_cast<std::size_t>(c) * h * w, 0.0)};
}

// Resize without zeroing; for maps every element of which gets written anyway.
void resize_map(FeatureMap& m, int c, int h, int w) {
    m.c = c;
    m.h = h;
    m.w = w;
    m.v.resize(static_cast<std::size_t>(c) * h * w);
}

// Zero-pad each channel by one pixel so 3x3 loops run without bounds tests.
// A matching reused buffer keeps its border zeros, so only the interior is copied.
void pad1(const double* src, int c, int h, int w, FeatureMap& out) {
    const bool reuse = out.c == c && out.h == h + 2 && out.w == w + 2 &&
                       out.v.size() == static_cast<std::size_t>(c) * (h + 2) * (w + 2);
    out.c = c;
    out.h = h + 2;
    out.w = w + 2;
    if (!reuse) {
        out.v.assign(static_cast<std::size_t>(c) * out.h * out.w, 0.0);
    }
    for (int ci = 0; ci < c; ++ci) {
        const double* sc = src + static_cast<std::size_t>(ci) * h * w;
        double* dst = out.channel(ci);
        for (int y = 0; y < h; ++y) {
            std::copy_n(sc + static_cast<std::size_t>(y) * w, w,
                        dst + static_cast<std::size_t>(y + 1) * out.w + 1);
        }
    }
}

void pad1(const FeatureMap& in, FeatureMap& out) {
    pad1(in.v.data(), in.c, in.h, in.w, out);
}

#if defined(__GNUC__)
#define ADVERIN_VEC8 1
// Eight doubles wide; the compiler lowers to whatever SIMD width exists.
typedef double vec8d __attribute__((vector_size(64), aligned(8), may_alias));

inline vec8d splat8(double v) {
    return vec8d{v, v, v, v, v, v, v, v};
}

inline const vec8d& load8(const double* p) {
    return *reinterpret_cast<const vec8d*>(p);
}
#endif

// Accumulates nchan padded channels through 3x3 windows into one h*w plane,
// 8 output pixels per step so the accumulator stays in one vector register.
// weights holds nchan*9 values in (channel, ky*3+kx) order.
template <bool Acc>
void conv3_gather(const double* chans, std::size_t chan_stride, int nchan, int inw,
                  const double* weights, double bias, double* out, int h, int w) {
    for (int y = 0; y < h; ++y) {
        double* orow = out + static_cast<std::size_t>(y) * w;
        int x = 0;
#if ADVERIN_VEC8
        for (; x + 8 <= w; x += 8) {
            vec8d acc = Acc ? load8(orow + x) : splat8(bias);
            for (int c = 0; c < nchan; ++c) {
                const double* base =
                    chans + chan_stride * c + static_cast<std::size_t>(y) * inw + x;
                const double* w9 = weights + static_cast<std::size_t>(c) * 9;
#pragma GCC unroll 9
                for (int t = 0; t < 9; ++t) {
                    acc += w9[t] * load8(base + (t / 3) * inw + (t % 3));
                }
            }
            *reinterpret_cast<vec8d*>(orow + x) = acc;
        }
#endif
        for (; x < w; ++x) {
            double a = Acc ? orow[x] : bias;
            for (int c = 0; c < nchan; ++c) {
                const double* base =
                    chans + chan_stride * c + static_cast<std::size_t>(y) * inw + x;
                const double* w9 = weights + static_cast<std::size_t>(c) * 9;
                for (int t = 0; t < 9; ++t) {
                    a += w9[t] * base[(t / 3) * inw + (t % 3)];
                }
            }
            orow[x] = a;
        }
    }
}

void conv3_forward(const ConvParam& p, const FeatureMap& inp, FeatureMap& out) {
    const int h = inp.h - 2;
    const int w = inp.w - 2;
    out.c = p.out_ch;
    out.h = h;
    out.w = w;
    out.v.resize(static_cast<std::size_t>(p.out_ch) * h * w);
    const std::size_t stride = static_cast<std::size_t>(inp.h) * inp.w;
    for (int co = 0; co < p.out_ch; ++co) {
        const double* wco = p.w.data() + static_cast<std::size_t>(co) * p.in_ch * 9;
        conv3_gather<false>(inp.v.data(), stride, p.in_ch, inp.w, wco, p.b[co],
                            out.channel(co), h, w);
    }
}

// Accumulates into d_inp (input-shaped, unpadded) and d_param when given.
void conv3_backward(const ConvParam& p, const FeatureMap& inp, const FeatureMap& d_out,
                    FeatureMap* d_inp, ConvParam* d_param) {
    const int h = d_out.h;
    const int w = d_out.w;
    const int inw = inp.w;

    if (d_param) {
        for (int co = 0; co < p.out_ch; ++co) {
            const double* doc = d_out.channel(co);
            double acc_b = 0.0;
            for (std::size_t i = 0; i < static_cast<std::size_t>(h) * w; ++i) {
                acc_b += doc[i];
            }
            d_param->b[co] += acc_b;
            for (int ci = 0; ci < p.in_ch; ++ci) {
                const double* ic = inp.channel(ci);
                double tail[9] = {};
#if ADVERIN_VEC8
                vec8d acc[9];
                for (int t = 0; t < 9; ++t) {
                    acc[t] = splat8(0.0);
                }
#endif
                for (int y = 0; y < h; ++y) {
                    const double* dr = doc + static_cast<std::size_t>(y) * w;
                    const double* base = ic + static_cast<std::size_t>(y) * inw;
                    int x = 0;
#if ADVERIN_VEC8
                    for (; x + 8 <= w; x += 8) {
                        const vec8d d8 = load8(dr + x);
#pragma GCC unroll 9
                        for (int t = 0; t < 9; ++t) {
                            acc[t] += d8 * load8(base + (t / 3) * inw + (t % 3) + x);
                        }
                    }
#endif
                    for (; x < w; ++x) {
                        for (int t = 0; t < 9; ++t) {
                            tail[t] += dr[x] * base[(t / 3) * inw + (t % 3) + x];
                        }
                    }
                }
                double* dwp =
                    d_param->w.data() + (static_cast<std::size_t>(co) * p.in_ch + ci) * 9;
                for (int t = 0; t < 9; ++t) {
                    double s = tail[t];
#if ADVERIN_VEC8
                    for (int j = 0; j < 8; ++j) {
                        s += acc[t][j];
                    }
#endif
                    dwp[t] += s;
                }
            }
        }
    }

    if (d_inp) {
        // d_input is the correlation of d_out with the flipped kernel, which
        // is again a 3x3 gather over d_out padded by one pixel. Scratch buffers
        // are pooled per thread, one per distinct shape seen.
        static thread_local std::vector<FeatureMap> pool;
        FeatureMap* dp = nullptr;
        for (FeatureMap& m : pool) {
            if (m.c == d_out.c && m.h == d_out.h + 2 && m.w == d_out.w + 2) {
                dp = &m;
                break;
            }
        }
        if (!dp) {
            pool.emplace_back();
            dp = &pool.back();
        }
        FeatureMap& doutp = *dp;
        pad1(d_out, doutp);
        const std::size_t stride = static_cast<std::size_t>(doutp.h) * doutp.w;
        std::vector<double> fw(static_cast<std::size_t>(p.out_ch) * 9);
        for (int ci = 0; ci < p.in_ch; ++ci) {
            for (int co = 0; co < p.out_ch; ++co) {
                for (int t = 0; t < 9; ++t) {
                    fw[static_cast<std::size_t>(co) * 9 + t] =
                        p.w[((static_cast<std::size_t>(co) * p.in_ch + ci) * 3 +
                             (2 - t / 3)) * 3 +
                            (2 - t % 3)];
                }
            }
            conv3_gather<true>(doutp.v.data(), stride, p.out_ch, doutp.w, fw.data(), 0.0,
                               d_inp->channel(ci), h, w);
        }
    }
}

void relu_inplace(FeatureMap& m) {
    for (double& x : m.v) {
        x = x > 0.0 ? x : 0.0;
    }
}

double sigmoid(double z) {
    if (z >= 0.0) {
        return 1.0 / (1.0 + std::exp(-z));
    }
    const double e = std::exp(z);
    return e / (1.0 + e);
}

struct ForwardCache {
    FeatureMap x_pad;
    FeatureMap a1, a1_pad;
    FeatureMap skip;
    FeatureMap pooled, pooled_pad;
    FeatureMap e2;
    FeatureMap cat, cat_pad;
    FeatureMap fused;
    FeatureMap probs;
};

class PatternHash {
public:
    void feed(bool bit) {
        h_ ^= static_cast<std::uint64_t>(bit) + 2;
        h_ *= 1099511628211ull;
    }
    void feed_relu(const FeatureMap& m) {
        for (double x : m.v) {
            feed(x > 0.0);
        }
    }
    std::uint64_t value() const { return h_; }

private:
    std::uint64_t h_ = 1469598103934665603ull;
};

void run_forward(const SegNet& net, const Image2D& image, ForwardCache& f, PatternHash* hash) {
    const int h = image.height;
    const int w = image.width;
    if (h <= 0 || w <= 0 || h % 2 != 0 || w % 2 != 0) {
        throw std::invalid_argument("segnet: image dims must be positive and even");
    }

    pad1(image.data.data(), 1, h, w, f.x_pad);

    conv3_forward(net.params.enc1a, f.x_pad, f.a1);
    relu_inplace(f.a1);
    if (hash) hash->feed_relu(f.a1);

    pad1(f.a1, f.a1_pad);
    conv3_forward(net.params.enc1b, f.a1_pad, f.skip);
    relu_inplace(f.skip);
    if (hash) hash->feed_relu(f.skip);

    const int hh = h / 2;
    const int hw = w / 2;
    resize_map(f.pooled, 8, hh, hw);
    for (int ci = 0; ci < 8; ++ci) {
        const double* src = f.skip.channel(ci);
        double* dst = f.pooled.channel(ci);
        for (int y = 0; y < hh; ++y) {
            for (int x2 = 0; x2 < hw; ++x2) {
                const std::size_t base = static_cast<std::size_t>(2 * y) * w + 2 * x2;
                dst[static_cast<std::size_t>(y) * hw + x2] =
                    0.25 * (src[base] + src[base + 1] + src[base + w] + src[base + w + 1]);
            }
        }
    }

    pad1(f.pooled, f.pooled_pad);
    conv3_forward(net.params.enc2, f.pooled_pad, f.e2);
    relu_inplace(f.e2);
    if (hash) hash->feed_relu(f.e2);

    // concat(upsampled e2, skip): channels 0..15 then 16..23
    resize_map(f.cat, 24, h, w);
    for (int ci = 0; ci < 16; ++ci) {
        const double* src = f.e2.channel(ci);
        double* dst = f.cat.channel(ci);
        for (int y = 0; y < h; ++y) {
            const double* sr = src + static_cast<std::size_t>(y / 2) * hw;
            double* dr = dst + static_cast<std::size_t>(y) * w;
            for (int x2 = 0; x2 < w; ++x2) {
                dr[x2] = sr[x2 / 2];
            }
        }
    }
    for (int ci = 0; ci < 8; ++ci) {
        std::copy_n(f.skip.channel(ci), static_cast<std::size_t>(h) * w,
                    f.cat.channel(16 + ci));
    }

    pad1(f.cat, f.cat_pad);
    conv3_forward(net.params.fuse, f.cat_pad, f.fused);
    relu_inplace(f.fused);
    if (hash) hash->feed_relu(f.fused);

    const int C = net.channels;
    resize_map(f.probs, C, h, w);
    const std::size_t hw_full = static_cast<std::size_t>(h) * w;
    for (int c = 0; c < C; ++c) {
        double* pc = f.probs.channel(c);
        std::fill_n(pc, hw_full, net.params.head.b[c]);
        for (int j = 0; j < 8; ++j) {
            const double wv = net.params.head.w[static_cast<std::size_t>(c) * 8 + j];
            const double* fj = f.fused.channel(j);
            for (std::size_t i = 0; i < hw_full; ++i) {
                pc[i] += wv * fj[i];
            }
        }
        for (std::size_t i = 0; i < hw_full; ++i) {
            pc[i] = sigmoid(pc[i]);
        }
    }
}

// Dice + BCE on the probability map; fills d_probs when given.
double probs_loss(const FeatureMap& probs, const MaskChannels& truth, FeatureMap* d_probs,
                  PatternHash* hash) {
    const int C = probs.c;
    const std::size_t hw = static_cast<std::size_t>(probs.h) * probs.w;
    const std::size_t total = static_cast<std::size_t>(C) * hw;

    double dice_loss = 0.0;
    for (int c = 0; c < C; ++c) {
        const double* p = probs.channel(c);
        const double* g = truth.data.data() + static_cast<std::size_t>(c) * hw;
        double inter = 0.0, sp = 0.0, sg = 0.0;
        for (std::size_t i = 0; i < hw; ++i) {
            inter += p[i] * g[i];
            sp += p[i];
            sg += g[i];
        }
        const double num = 2.0 * inter + kDiceEps;
        const double den = sp + sg + kDiceEps;
        dice_loss += 1.0 - num / den;
        if (d_probs) {
            double* dp = d_probs->channel(c);
            const double inv = 1.0 / (den * den * C);
            for (std::size_t i = 0; i < hw; ++i) {
                dp[i] += (num - 2.0 * g[i] * den) * inv;
            }
        }
    }
    dice_loss /= C;

    double bce = 0.0;
    const double inv_total = 1.0 / static_cast<double>(total);
    for (int c = 0; c < C; ++c) {
        const double* p = probs.channel(c);
        const double* g = truth.data.data() + static_cast<std::size_t>(c) * hw;
        double* dp = d_probs ? d_probs->channel(c) : nullptr;
        for (std::size_t i = 0; i < hw; ++i) {
            const bool lo = p[i] < kProbClampLo;
            const bool hi = p[i] > kProbClampHi;
            if (hash) {
                hash->feed(lo);
                hash->feed(hi);
            }
            const double pc = lo ? kProbClampLo : (hi ? kProbClampHi : p[i]);
            bce -= g[i] * std::log(pc) + (1.0 - g[i]) * std::log(1.0 - pc);
            if (dp && !lo && !hi) {
                dp[i] += (pc - g[i]) / (pc * (1.0 - pc)) * inv_total;
            }
        }
    }
    bce *= inv_total;

    return dice_loss + bce;
}

void relu_backward(const FeatureMap& post, FeatureMap& d) {
    for (std::size_t i = 0; i < post.v.size(); ++i) {
        if (post.v[i] <= 0.0) {
            d.v[i] = 0.0;
        }
    }
}

void check_truth(const SegNet& net, const Image2D& image, const MaskChannels& truth) {
    if (truth.channels != net.channels || truth.height != image.height ||
        truth.width != image.width) {
        throw std::invalid_argument("segnet: truth shape does not match net/image");
    }
}

}  // namespace

ConvParam ConvParam::zeros(int out_ch, int in_ch, int ksize) {
    ConvParam p;
    p.out_ch = out_ch;
    p.in_ch = in_ch;
    p.ksize = ksize;
    p.w.assign(static_cast<std::size_t>(out_ch) * in_ch * ksize * ksize, 0.0);
    p.b.assign(static_cast<std::size_t>(out_ch), 0.0);
    return p;
}

SegNet init_segnet(Rng& rng, int channels) {
    if (channels < 1) {
        throw std::invalid_argument("init_segnet: channels must be >= 1");
    }
    SegNet net;
    net.channels = channels;
    net.params.enc1a = ConvParam::zeros(8, 1, 3);
    net.params.enc1b = ConvParam::zeros(8, 8, 3);
    net.params.enc2 = ConvParam::zeros(16, 8, 3);
    net.params.fuse = ConvParam::zeros(8, 24, 3);
    net.params.head = ConvParam::zeros(channels, 8, 1);

    auto fill = [&rng](ConvParam& p) {
        const double a = std::sqrt(1.0 / (static_cast<double>(p.in_ch) * p.ksize * p.ksize));
        for (double& w : p.w) {
            w = (2.0 * rng.uniform() - 1.0) * a;
        }
    };
    fill(net.params.enc1a);
    fill(net.params.enc1b);
    fill(net.params.enc2);
    fill(net.params.fuse);
    fill(net.params.head);
    return net;
}

NetParams zeros_like(const SegNet& net) {
    NetParams z;
    z.enc1a = ConvParam::zeros(8, 1, 3);
    z.enc1b = ConvParam::zeros(8, 8, 3);
    z.enc2 = ConvParam::zeros(16, 8, 3);
    z.fuse = ConvParam::zeros(8, 24, 3);
    z.head = ConvParam::zeros(net.channels, 8, 1);
    return z;
}

Prediction forward(const SegNet& net, const Image2D& image) {
    static thread_local ForwardCache f;
    run_forward(net, image, f, nullptr);
    Prediction out;
    out.channels = net.channels;
    out.height = image.height;
    out.width = image.width;
    out.probs = std::move(f.probs.v);
    return out;
}

LossProbe loss_probe(const SegNet& net, const Image2D& image, const MaskChannels& truth) {
    check_truth(net, image, truth);
    static thread_local ForwardCache f;
    PatternHash hash;
    run_forward(net, image, f, &hash);
    const double loss = probs_loss(f.probs, truth, nullptr, &hash);
    return {loss, hash.value()};
}

LossGrads loss_and_grads(const SegNet& net, const Image2D& image, const MaskChannels& truth,
                         bool want_param_grads) {
    check_truth(net, image, truth);
    static thread_local ForwardCache f;
    run_forward(net, image, f, nullptr);

    const int h = image.height;
    const int w = image.width;
    const int hh = h / 2;
    const int hw2 = w / 2;
    const int C = net.channels;
    const std::size_t hw_full = static_cast<std::size_t>(h) * w;

    LossGrads out;
    out.d_theta = zeros_like(net);

    FeatureMap d_probs = make_map(C, h, w);
    out.loss = probs_loss(f.probs, truth, &d_probs, nullptr);

    // sigmoid: dz = dp * p * (1 - p)
    FeatureMap d_z = std::move(d_probs);
    for (std::size_t i = 0; i < d_z.v.size(); ++i) {
        const double p = f.probs.v[i];
        d_z.v[i] *= p * (1.0 - p);
    }

    // head 1x1
    FeatureMap d_fused = make_map(8, h, w);
    for (int c = 0; c < C; ++c) {
        const double* dz = d_z.channel(c);
        if (want_param_grads) {
            double acc_b = 0.0;
            for (std::size_t i = 0; i < hw_full; ++i) {
                acc_b += dz[i];
            }
            out.d_theta.head.b[c] += acc_b;
        }
        for (int j = 0; j < 8; ++j) {
            const double* fj = f.fused.channel(j);
            double* dfj = d_fused.channel(j);
            const double wv = net.params.head.w[static_cast<std::size_t>(c) * 8 + j];
            double acc_w = 0.0;
            for (std::size_t i = 0; i < hw_full; ++i) {
                acc_w += dz[i] * fj[i];
                dfj[i] += wv * dz[i];
            }
            if (want_param_grads) {
                out.d_theta.head.w[static_cast<std::size_t>(c) * 8 + j] += acc_w;
            }
        }
    }

    relu_backward(f.fused, d_fused);

    NetParams* dt = want_param_grads ? &out.d_theta : nullptr;
    FeatureMap d_cat = make_map(24, h, w);
    conv3_backward(net.params.fuse, f.cat_pad, d_fused, &d_cat, dt ? &dt->fuse : nullptr);

    // split: d_up = channels 0..15, d_skip gets channels 16..23
    FeatureMap d_e2 = make_map(16, hh, hw2);
    for (int ci = 0; ci < 16; ++ci) {
        const double* dup = d_cat.channel(ci);
        double* de = d_e2.channel(ci);
        for (int y = 0; y < h; ++y) {
            const double* dr = dup + static_cast<std::size_t>(y) * w;
            double* er = de + static_cast<std::size_t>(y / 2) * hw2;
            for (int x = 0; x < w; ++x) {
                er[x / 2] += dr[x];
            }
        }
    }
    relu_backward(f.e2, d_e2);

    FeatureMap d_pooled = make_map(8, hh, hw2);
    conv3_backward(net.params.enc2, f.pooled_pad, d_e2, &d_pooled, dt ? &dt->enc2 : nullptr);

    FeatureMap d_skip;
    resize_map(d_skip, 8, h, w);
    for (int ci = 0; ci < 8; ++ci) {
        std::copy_n(d_cat.channel(16 + ci), hw_full, d_skip.channel(ci));
    }
    for (int ci = 0; ci < 8; ++ci) {
        const double* dp = d_pooled.channel(ci);
        double* ds = d_skip.channel(ci);
        for (int y = 0; y < hh; ++y) {
            for (int x = 0; x < hw2; ++x) {
                const double v = 0.25 * dp[static_cast<std::size_t>(y) * hw2 + x];
                const std::size_t base = static_cast<std::size_t>(2 * y) * w + 2 * x;
                ds[base] += v;
                ds[base + 1] += v;
                ds[base + w] += v;
                ds[base + w + 1] += v;
            }
        }
    }
    relu_backward(f.skip, d_skip);

    FeatureMap d_a1 = make_map(8, h, w);
    conv3_backward(net.params.enc1b, f.a1_pad, d_skip, &d_a1, dt ? &dt->enc1b : nullptr);
    relu_backward(f.a1, d_a1);

    FeatureMap d_x = make_map(1, h, w);
    conv3_backward(net.params.enc1a, f.x_pad, d_a1, &d_x, dt ? &dt->enc1a : nullptr);
    out.d_input = std::move(d_x.v);

    return out;
}

void sgd_update(SegNet& net, const NetParams& d_theta, double lr, double momentum,
                NetParams& velocity) {
    if (!(lr > 0.0)) {
        throw std::invalid_argument("sgd_update: lr must be positive");
    }
    const std::vector<double>* grads[10];
    std::vector<double>* vels[10];
    std::vector<double>* thetas[10];
    int gi = 0, vi = 0, ti = 0;
    d_theta.for_each_tensor([&](const std::vector<double>& t) { grads[gi++] = &t; });
    velocity.for_each_tensor([&](std::vector<double>& t) { vels[vi++] = &t; });
    net.params.for_each_tensor([&](std::vector<double>& t) { thetas[ti++] = &t; });
    for (int k = 0; k < 10; ++k) {
        if (grads[k]->size() != thetas[k]->size() || vels[k]->size() != thetas[k]->size()) {
            throw std::invalid_argument("sgd_update: tensor shape mismatch");
        }
        for (std::size_t i = 0; i < thetas[k]->size(); ++i) {
            double& v = (*vels[k])[i];
            v = momentum * v + (*grads[k])[i];
            (*thetas[k])[i] -= lr * v;
        }
    }
}

void save_checkpoint(const std::string& path, const SegNet& net, int n_points, double delta) {
    const auto& p = net.params;
    const auto u = [](int x) { return static_cast<std::uint32_t>(x); };
    std::vector<NamedTensor> tensors{
        {"enc1a.w", {8, 1, 3, 3}, p.enc1a.w},
        {"enc1a.b", {8}, p.enc1a.b},
        {"enc1b.w", {8, 8, 3, 3}, p.enc1b.w},
        {"enc1b.b", {8}, p.enc1b.b},
        {"enc2.w", {16, 8, 3, 3}, p.enc2.w},
        {"enc2.b", {16}, p.enc2.b},
        {"fuse.w", {8, 24, 3, 3}, p.fuse.w},
        {"fuse.b", {8}, p.fuse.b},
        {"head.w", {u(net.channels), 8, 1, 1}, p.head.w},
        {"head.b", {u(net.channels)}, p.head.b},
        {"meta.c", {1}, {static_cast<double>(net.channels)}},
        {"meta.n", {1}, {static_cast<double>(n_points)}},
        {"meta.delta", {1}, {delta}},
    };
    write_container(path, tensors);
}

Checkpoint load_checkpoint(const std::string& path) {
    const auto tensors = read_container(path);
    Checkpoint ck;
    ck.net.channels = static_cast<int>(find_tensor(tensors, "meta.c").values.at(0));
    ck.n_points = static_cast<int>(find_tensor(tensors, "meta.n").values.at(0));
    ck.delta = find_tensor(tensors, "meta.delta").values.at(0);
    if (ck.net.channels < 1) {
        throw std::runtime_error("checkpoint: invalid channel count");
    }
    ck.net.params.enc1a = ConvParam::zeros(8, 1, 3);
    ck.net.params.enc1b = ConvParam::zeros(8, 8, 3);
    ck.net.params.enc2 = ConvParam::zeros(16, 8, 3);
    ck.net.params.fuse = ConvParam::zeros(8, 24, 3);
    ck.net.params.head = ConvParam::zeros(ck.net.channels, 8, 1);

    auto load = [&tensors](const std::string& name, std::vector<double>& dst) {
        const auto& t = find_tensor(tensors, name);
        if (t.values.size() != dst.size()) {
            throw std::runtime_error("checkpoint: unexpected shape for '" + name + "'");
        }
        dst = t.values;
    };
    load("enc1a.w", ck.net.params.enc1a.w);
    load("enc1a.b", ck.net.params.enc1a.b);
    load("enc1b.w", ck.net.params.enc1b.w);
    load("enc1b.b", ck.net.params.enc1b.b);
    load("enc2.w", ck.net.params.enc2.w);
    load("enc2.b", ck.net.params.enc2.b);
    load("fuse.w", ck.net.params.fuse.w);
    load("fuse.b", ck.net.params.fuse.b);
    load("head.w", ck.net.params.head.w);
    load("head.b", ck.net.params.head.b);
    return ck;
}

}  // namespace adverin

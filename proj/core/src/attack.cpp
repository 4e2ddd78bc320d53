#include "adverin/attack.hpp"

#include <cmath>
#include <stdexcept>

#include "adverin/region_mask.hpp"

namespace adverin {

namespace {

void check_mask(const Image2D& image, const BinaryMask& mask) {
    if (mask.height != image.height || mask.width != image.width) {
        throw std::invalid_argument("mask shape does not match image");
    }
}

}  // namespace

Image2D compose(const Image2D& image, const IntensityMapper& mapper, const BinaryMask& mask) {
    check_mask(image, mask);
    if (mapper.is_identity() || image.vmax == image.vmin) {
        return image;
    }
    const double range = image.vmax - image.vmin;
    const MappingCurve c = curve(mapper);
    Image2D out = image;
    for (std::size_t p = 0; p < out.data.size(); ++p) {
        if (!mask.data[p]) {
            continue;
        }
        const double t = (out.data[p] - image.vmin) / range;
        const double mapped = range * eval_unit(c, mapper.n, t) + image.vmin;
        out.data[p] = std::clamp(mapped, image.vmin, image.vmax);
    }
    return out;
}

std::vector<double> grad_loss_wrt_rho(const std::vector<double>& d_input, const Image2D& image,
                                      const BinaryMask& mask, int n_points) {
    check_mask(image, mask);
    if (n_points < 1) {
        throw std::invalid_argument("grad_loss_wrt_rho: n_points must be >= 1");
    }
    if (d_input.size() != image.data.size()) {
        throw std::invalid_argument("grad_loss_wrt_rho: d_input size mismatch");
    }
    std::vector<double> out(static_cast<std::size_t>(n_points) + 1, 0.0);
    if (image.vmax == image.vmin) {
        return out;
    }
    const double range = image.vmax - image.vmin;
    const auto g = grad_knots(IntensityMapper::identity(n_points));
    std::vector<double> pix;
    for (std::size_t p = 0; p < image.data.size(); ++p) {
        if (!mask.data[p]) {
            continue;
        }
        const double t = (image.data[p] - image.vmin) / range;
        grad_pixel_into(g, n_points, t, pix);
        const double scale = d_input[p] * range;
        for (int k = 1; k <= n_points; ++k) {
            out[k] += scale * pix[k];
        }
    }
    return out;
}

AttackResult attack(const SegNet& net, const Sample& sample, const AttackConfig& cfg, Rng& rng) {
    if (cfg.delta < 0.0 || !std::isfinite(cfg.delta)) {
        throw std::invalid_argument("attack: delta must be finite and >= 0");
    }
    if (cfg.n_points < 1) {
        throw std::invalid_argument("attack: n_points must be >= 1");
    }
    AttackResult res;
    if (!cfg.enabled) {
        return res;
    }
    if (cfg.attack_prob < 1.0 && rng.uniform() >= cfg.attack_prob) {
        return res;
    }
    if (!sample.region_labels) {
        throw std::invalid_argument("attack: sample has no region labels");
    }
    const RegionLabels& labels = *sample.region_labels;
    if (cfg.regions_sampled < 1 || cfg.regions_sampled > labels.k) {
        throw std::invalid_argument("attack: regions_sampled out of range");
    }

    res.mask = sample_mask(labels, cfg.regions_sampled, rng);

    const LossGrads lg = loss_and_grads(net, sample.image, sample.truth, false);
    res.loss_before = lg.loss;

    const auto g = grad_loss_wrt_rho(lg.d_input, sample.image, res.mask, cfg.n_points);
    double sq = 0.0;
    for (double v : g) {
        sq += v * v;
    }
    const double norm = std::sqrt(sq);
    if (norm < 1e-12) {
        return res;
    }
    res.attacked = true;
    res.rho_hat.resize(g.size());
    for (std::size_t k = 0; k < g.size(); ++k) {
        res.rho_hat[k] = cfg.delta * g[k] / norm;
    }
    res.predicted_increase = cfg.delta * norm;
    return res;
}

Image2D apply_attack(const Sample& sample, const AttackResult& result) {
    if (!result.attacked) {
        return sample.image;
    }
    return compose(sample.image, IntensityMapper::from_rho(result.rho_hat), result.mask);
}

Image2D adverin_example(const SegNet& net, const Sample& sample, const AttackConfig& cfg,
                        Rng& rng) {
    return apply_attack(sample, attack(net, sample, cfg, rng));
}

}  // namespace adverin

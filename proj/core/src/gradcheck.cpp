#include "adverin/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "adverin/attack.hpp"
#include "adverin/intensity_map.hpp"
#include "adverin/rng.hpp"
#include "adverin/segnet.hpp"

namespace adverin {

namespace {

constexpr double kCurveH = 1e-6;
constexpr double kNetH = 1e-5;

std::size_t param_count(const NetParams& p) {
    std::size_t n = 0;
    p.for_each_tensor([&n](const std::vector<double>& t) { n += t.size(); });
    return n;
}

double& param_at(NetParams& p, std::size_t flat) {
    double* out = nullptr;
    p.for_each_tensor([&](std::vector<double>& t) {
        if (out != nullptr) {
            return;
        }
        if (flat < t.size()) {
            out = &t[flat];
            return;
        }
        flat -= t.size();
    });
    if (out == nullptr) {
        throw std::out_of_range("param_at: index past end");
    }
    return *out;
}

Image2D random_image(Rng& rng, int size) {
    Image2D img;
    img.height = size;
    img.width = size;
    img.vmin = -1.0;
    img.vmax = 1.0;
    img.data.resize(static_cast<std::size_t>(size) * size);
    for (double& v : img.data) {
        v = 2.0 * rng.uniform() - 1.0;
    }
    return img;
}

MaskChannels random_truth(Rng& rng, int channels, int size) {
    MaskChannels t;
    t.channels = channels;
    t.height = size;
    t.width = size;
    t.data.resize(static_cast<std::size_t>(channels) * size * size);
    for (double& v : t.data) {
        v = static_cast<double>(rng.below(2));
    }
    return t;
}

void check_curve(GradCheckReport& r, Rng& rng, int cases) {
    for (int it = 0; it < cases; ++it) {
        const int n = 1 + static_cast<int>(rng.below(16));
        std::vector<double> rho(static_cast<std::size_t>(n) + 1);
        for (double& v : rho) {
            v = 2.0 * rng.normal();
        }
        const auto mapper = IntensityMapper::from_rho(rho);
        const double t = rng.uniform();
        const auto analytic = grad_pixel(mapper, t);
        const auto knots_grad = grad_knots(mapper);
        const int ki = static_cast<int>(rng.below(static_cast<std::uint64_t>(n) + 1));

        for (int k = 0; k <= n; ++k) {
            auto probe = [&](double h) {
                std::vector<double> pr = rho;
                pr[k] += h;
                return IntensityMapper::from_rho(pr);
            };
            const auto hi = probe(kCurveH);
            const auto lo = probe(-kCurveH);
            r.probes_total += 2;
            const double fd_pix =
                (eval_unit(hi, t) - eval_unit(lo, t)) / (2.0 * kCurveH);
            r.max_err_curve = std::max(r.max_err_curve, rel_err(analytic[k], fd_pix));
            const double fd_knot =
                (curve(hi).knots[ki] - curve(lo).knots[ki]) / (2.0 * kCurveH);
            r.max_err_curve = std::max(r.max_err_curve, rel_err(knots_grad[ki][k], fd_knot));
        }
        ++r.curve_cases;
    }
}

void check_net(GradCheckReport& r, Rng& rng, int cases) {
    constexpr int kSize = 8;
    constexpr int kParamProbes = 20;
    constexpr int kInputProbes = 10;
    for (int it = 0; it < cases; ++it) {
        SegNet net = init_segnet(rng, 2);
        Image2D image = random_image(rng, kSize);
        const MaskChannels truth = random_truth(rng, 2, kSize);
        LossGrads lg = loss_and_grads(net, image, truth);
        const std::size_t np = param_count(net.params);

        for (int p = 0; p < kParamProbes; ++p) {
            const std::size_t flat = rng.below(np);
            double& ref = param_at(net.params, flat);
            const double saved = ref;
            ref = saved + kNetH;
            const LossProbe hi = loss_probe(net, image, truth);
            ref = saved - kNetH;
            const LossProbe lo = loss_probe(net, image, truth);
            ref = saved;
            r.probes_total += 2;
            if (hi.pattern != lo.pattern) {
                ++r.probes_skipped;
                continue;
            }
            const double fd = (hi.loss - lo.loss) / (2.0 * kNetH);
            r.max_err_theta =
                std::max(r.max_err_theta, rel_err(param_at(lg.d_theta, flat), fd));
        }

        for (int p = 0; p < kInputProbes; ++p) {
            const std::size_t pix = rng.below(image.data.size());
            const double saved = image.data[pix];
            image.data[pix] = saved + kNetH;
            const LossProbe hi = loss_probe(net, image, truth);
            image.data[pix] = saved - kNetH;
            const LossProbe lo = loss_probe(net, image, truth);
            image.data[pix] = saved;
            r.probes_total += 2;
            if (hi.pattern != lo.pattern) {
                ++r.probes_skipped;
                continue;
            }
            const double fd = (hi.loss - lo.loss) / (2.0 * kNetH);
            r.max_err_input = std::max(r.max_err_input, rel_err(lg.d_input[pix], fd));
        }
        ++r.net_cases;
    }
}

void check_rho_chain(GradCheckReport& r, Rng& rng, int cases) {
    constexpr int kSize = 8;
    for (int it = 0; it < cases; ++it) {
        SegNet net = init_segnet(rng, 2);
        const Image2D image = random_image(rng, kSize);
        const MaskChannels truth = random_truth(rng, 2, kSize);
        const int n = 2 + static_cast<int>(rng.below(11));
        BinaryMask mask;
        mask.height = kSize;
        mask.width = kSize;
        mask.data.resize(static_cast<std::size_t>(kSize) * kSize);
        for (auto& v : mask.data) {
            v = static_cast<std::uint8_t>(rng.below(2));
        }

        const LossGrads lg = loss_and_grads(net, image, truth, false);
        const auto g = grad_loss_wrt_rho(lg.d_input, image, mask, n);
        r.max_abs_g0 = std::max(r.max_abs_g0, std::fabs(g[0]));

        for (int k = 1; k <= n; ++k) {
            auto probe = [&](double h) {
                std::vector<double> rho(static_cast<std::size_t>(n) + 1, 0.0);
                rho[k] = h;
                const Image2D x = compose(image, IntensityMapper::from_rho(rho), mask);
                return loss_probe(net, x, truth);
            };
            const LossProbe hi = probe(kNetH);
            const LossProbe lo = probe(-kNetH);
            r.probes_total += 2;
            if (hi.pattern != lo.pattern) {
                ++r.probes_skipped;
                continue;
            }
            const double fd = (hi.loss - lo.loss) / (2.0 * kNetH);
            r.max_err_rho = std::max(r.max_err_rho, rel_err(g[k], fd));
        }
        ++r.rho_cases;
    }
}

}  // namespace

double rel_err(double a, double b) {
    return std::fabs(a - b) / std::max({1.0, std::fabs(a), std::fabs(b)});
}

bool GradCheckReport::pass(double tol_curve, double tol_net) const {
    const bool skips_ok = probes_skipped * 50 <= probes_total;
    return max_err_curve < tol_curve && max_err_theta < tol_net && max_err_input < tol_net &&
           max_err_rho < tol_net && max_abs_g0 == 0.0 && skips_ok;
}

GradCheckReport run_gradcheck(int trials, std::uint64_t seed) {
    if (trials < 1) {
        throw std::invalid_argument("run_gradcheck: trials must be >= 1");
    }
    GradCheckReport r;
    Rng rng(mix_seed({seed, 0x677263ull}));
    check_curve(r, rng, trials * 10);
    check_net(r, rng, trials);
    check_rho_chain(r, rng, trials);
    return r;
}

}  // namespace adverin

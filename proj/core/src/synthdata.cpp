#include "adverin/synthdata.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <numbers>
#include <stdexcept>

namespace adverin {

namespace {

constexpr DomainStyle kStyles[8] = {
    {1.0, 0.0, 1.0, 0.02, 0.0},  {0.6, 0.1, 1.2, 0.05, 0.2},
    {1.8, -0.1, 0.8, 0.03, 0.1}, {1.0, 0.2, 0.6, 0.08, 0.3},
    {1.3, -0.2, 1.4, 0.04, 0.15}, {0.8, 0.15, 0.9, 0.06, 0.25},
    {2.2, 0.05, 1.1, 0.07, 0.05}, {0.5, -0.15, 0.7, 0.09, 0.35},
};

struct Ellipse {
    double cy, cx, ry, rx;

    bool contains(int r, int c) const {
        const double dy = (r - cy) / ry;
        const double dx = (c - cx) / rx;
        return dy * dy + dx * dx <= 1.0;
    }
};

}  // namespace

std::vector<DomainStyle> builtin_styles(int n_domains) {
    if (n_domains < 1 || n_domains > 8) {
        throw std::invalid_argument("builtin_styles: n_domains must be in [1, 8]");
    }
    return {kStyles, kStyles + n_domains};
}

Sample generate_sample(const DomainStyle& style, int size, Rng& rng) {
    if (size < 2 || size % 2 != 0) {
        throw std::invalid_argument("generate_sample: size must be even and >= 2");
    }
    if (!(style.gamma > 0.0) || !(style.contrast > 0.0) || style.noise_sigma < 0.0 ||
        style.bias_amp < 0.0) {
        throw std::invalid_argument("generate_sample: bad style");
    }

    Ellipse disc;
    disc.cy = size * (0.25 + 0.5 * rng.uniform());
    disc.cx = size * (0.25 + 0.5 * rng.uniform());
    disc.ry = size * (0.15 + 0.2 * rng.uniform());
    disc.rx = size * (0.15 + 0.2 * rng.uniform());

    Ellipse cup;
    cup.ry = disc.ry * (0.4 + 0.3 * rng.uniform());
    cup.rx = disc.rx * (0.4 + 0.3 * rng.uniform());

    // Jitter the cup center inside a budget that keeps every cup boundary
    // point strictly inside the disc in normalized coordinates.
    const double q = std::max(cup.ry / disc.ry, cup.rx / disc.rx);
    const double budget = 0.8 * (1.0 - q);
    const double angle = 2.0 * std::numbers::pi * rng.uniform();
    const double mag = budget * rng.uniform();
    cup.cy = disc.cy + mag * std::sin(angle) * disc.ry;
    cup.cx = disc.cx + mag * std::cos(angle) * disc.rx;

    const double phase_r = 2.0 * std::numbers::pi * rng.uniform();
    const double phase_c = 2.0 * std::numbers::pi * rng.uniform();

    Sample s;
    s.image.height = size;
    s.image.width = size;
    s.image.data.resize(static_cast<std::size_t>(size) * size);
    s.truth.channels = 2;
    s.truth.height = size;
    s.truth.width = size;
    s.truth.data.assign(2 * static_cast<std::size_t>(size) * size, 0.0);

    const std::size_t hw = static_cast<std::size_t>(size) * size;
    const double two_pi = 2.0 * std::numbers::pi;
    for (int r = 0; r < size; ++r) {
        for (int c = 0; c < size; ++c) {
            const std::size_t p = static_cast<std::size_t>(r) * size + c;
            double v = 0.3 * (r + c) / (2.0 * (size - 1));
            if (disc.contains(r, c)) {
                v += 0.5;
                s.truth.data[p] = 1.0;
                if (cup.contains(r, c)) {
                    v += 0.3;
                    s.truth.data[hw + p] = 1.0;
                }
            }
            const double field = 1.0 + style.bias_amp * 0.5 *
                                           (std::cos(two_pi * r / size + phase_r) +
                                            std::cos(two_pi * c / size + phase_c));
            s.image.data[p] = v * field;
        }
    }

    const auto [mn_it, mx_it] = std::minmax_element(s.image.data.begin(), s.image.data.end());
    const double mn = *mn_it;
    const double span = *mx_it - mn;
    for (double& v : s.image.data) {
        v = span > 0.0 ? (v - mn) / span : 0.5;
        v = std::pow(v, style.gamma);
        v = style.contrast * (v - 0.5) + 0.5 + style.brightness;
    }
    for (double& v : s.image.data) {
        v += style.noise_sigma * rng.normal();
        v = std::clamp(v, 0.0, 1.0);
        v = 2.0 * v - 1.0;
    }
    s.image.vmin = -1.0;
    s.image.vmax = 1.0;
    return s;
}

std::vector<ManifestEntry> generate_dataset(const GenConfig& cfg, const std::string& out_dir) {
    if (cfg.per_domain < 1) {
        throw std::invalid_argument("generate_dataset: per_domain must be >= 1");
    }
    const auto styles = builtin_styles(cfg.n_domains);
    std::filesystem::create_directories(out_dir);

    std::vector<ManifestEntry> entries;
    entries.reserve(static_cast<std::size_t>(cfg.n_domains) * cfg.per_domain);
    char name[64];
    for (int d = 0; d < cfg.n_domains; ++d) {
        for (int i = 0; i < cfg.per_domain; ++i) {
            Rng rng(mix_seed({cfg.seed, kStreamGen, static_cast<std::uint64_t>(d),
                              static_cast<std::uint64_t>(i)}));
            Sample s = generate_sample(styles[d], cfg.size, rng);
            std::snprintf(name, sizeof(name), "d%d_s%03d", d, i);
            s.sample_id = name;
            s.domain_id = d;
            const std::string file = std::string(name) + ".bin";
            save_sample((std::filesystem::path(out_dir) / file).string(), s);
            entries.push_back({s.sample_id, d, file});
        }
    }
    write_manifest((std::filesystem::path(out_dir) / "manifest.csv").string(), entries);
    return entries;
}

}  // namespace adverin

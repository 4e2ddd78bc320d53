#include "adverin/region_mask.hpp"

#include <array>
#include <limits>
#include <stdexcept>
#include <vector>

namespace adverin {

namespace {

constexpr int kMaxIterations = 50;

using Feature = std::array<double, 3>;

double dist2(const Feature& a, const Feature& b) {
    const double d0 = a[0] - b[0];
    const double d1 = a[1] - b[1];
    const double d2 = a[2] - b[2];
    return d0 * d0 + d1 * d1 + d2 * d2;
}

std::vector<Feature> pixel_features(const Image2D& image, double spatial_weight) {
    std::vector<Feature> f;
    f.reserve(image.pixels());
    const double range = image.vmax - image.vmin;
    for (int y = 0; y < image.height; ++y) {
        for (int x = 0; x < image.width; ++x) {
            const double intensity =
                range == 0.0 ? 0.0 : (image.at(y, x) - image.vmin) / range;
            f.push_back({spatial_weight * y / image.height,
                         spatial_weight * x / image.width, intensity});
        }
    }
    return f;
}

// k-means++: first center uniform, the rest proportional to the squared
// distance from the nearest chosen center.
std::vector<Feature> plus_plus_init(const std::vector<Feature>& points, int k, Rng& rng) {
    const std::size_t npts = points.size();
    std::vector<Feature> centers;
    centers.reserve(static_cast<std::size_t>(k));
    centers.push_back(points[rng.below(npts)]);

    std::vector<double> d2(npts);
    for (std::size_t p = 0; p < npts; ++p) {
        d2[p] = dist2(points[p], centers[0]);
    }
    while (centers.size() < static_cast<std::size_t>(k)) {
        double total = 0.0;
        for (double d : d2) {
            total += d;
        }
        std::size_t pick;
        if (total == 0.0) {
            pick = rng.below(npts);  // all remaining points coincide with a center
        } else {
            const double r = rng.uniform() * total;
            double acc = 0.0;
            pick = npts - 1;
            for (std::size_t p = 0; p < npts; ++p) {
                acc += d2[p];
                if (acc > r) {
                    pick = p;
                    break;
                }
            }
        }
        centers.push_back(points[pick]);
        for (std::size_t p = 0; p < npts; ++p) {
            d2[p] = std::min(d2[p], dist2(points[p], centers.back()));
        }
    }
    return centers;
}

}  // namespace

RegionLabels compute_region_labels(const Image2D& image, int k, double spatial_weight,
                                   std::uint64_t seed) {
    validate(image);
    if (k < 1) {
        throw std::invalid_argument("compute_region_labels: k must be >= 1");
    }
    if (static_cast<std::size_t>(k) > image.pixels()) {
        throw std::invalid_argument("compute_region_labels: k exceeds pixel count");
    }

    const std::vector<Feature> points = pixel_features(image, spatial_weight);
    const std::size_t npts = points.size();
    Rng rng(seed);
    std::vector<Feature> centers = plus_plus_init(points, k, rng);

    std::vector<int> assign(npts, 0);
    for (int iter = 0; iter < kMaxIterations; ++iter) {
        bool changed = false;
        for (std::size_t p = 0; p < npts; ++p) {
            int best = 0;
            double best_d = dist2(points[p], centers[0]);
            for (int c = 1; c < k; ++c) {
                const double d = dist2(points[p], centers[c]);
                if (d < best_d) {  // strict: ties keep the lowest index
                    best_d = d;
                    best = c;
                }
            }
            if (assign[p] != best) {
                assign[p] = best;
                changed = true;
            }
        }

        // Reseed empties from the globally worst-fitting point.
        std::vector<std::size_t> counts(static_cast<std::size_t>(k), 0);
        for (int a : assign) {
            counts[static_cast<std::size_t>(a)]++;
        }
        for (int c = 0; c < k; ++c) {
            if (counts[static_cast<std::size_t>(c)] > 0) {
                continue;
            }
            double worst = -1.0;
            std::size_t worst_p = 0;
            for (std::size_t p = 0; p < npts; ++p) {
                if (counts[static_cast<std::size_t>(assign[p])] <= 1) {
                    continue;  // do not empty another cluster
                }
                const double d = dist2(points[p], centers[assign[p]]);
                if (d > worst) {
                    worst = d;
                    worst_p = p;
                }
            }
            counts[static_cast<std::size_t>(assign[worst_p])]--;
            assign[worst_p] = c;
            counts[static_cast<std::size_t>(c)] = 1;
            centers[c] = points[worst_p];
            changed = true;
        }

        if (!changed && iter > 0) {
            break;
        }

        std::vector<Feature> sums(static_cast<std::size_t>(k), Feature{0.0, 0.0, 0.0});
        for (std::size_t p = 0; p < npts; ++p) {
            const auto& f = points[p];
            auto& s = sums[static_cast<std::size_t>(assign[p])];
            s[0] += f[0];
            s[1] += f[1];
            s[2] += f[2];
        }
        for (int c = 0; c < k; ++c) {
            const auto cnt = counts[static_cast<std::size_t>(c)];
            if (cnt > 0) {
                const double inv = 1.0 / static_cast<double>(cnt);
                centers[c] = {sums[c][0] * inv, sums[c][1] * inv, sums[c][2] * inv};
            }
        }
    }

    RegionLabels out{image.height, image.width, k, std::move(assign)};
    return out;
}

BinaryMask sample_mask(const RegionLabels& labels, int m, Rng& rng) {
    if (m < 1 || m > labels.k) {
        throw std::invalid_argument("sample_mask: m outside [1, k]");
    }
    const auto chosen = rng.choice_k(static_cast<std::size_t>(labels.k),
                                     static_cast<std::size_t>(m));
    std::vector<std::uint8_t> selected(static_cast<std::size_t>(labels.k), 0);
    for (std::size_t c : chosen) {
        selected[c] = 1;
    }
    BinaryMask mask{labels.height, labels.width, {}};
    mask.data.resize(labels.labels.size());
    for (std::size_t p = 0; p < labels.labels.size(); ++p) {
        mask.data[p] = selected[static_cast<std::size_t>(labels.labels[p])];
    }
    return mask;
}

}  // namespace adverin

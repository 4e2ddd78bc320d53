#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "adverin/dataset.hpp"
#include "adverin/image.hpp"
#include "adverin/rng.hpp"

namespace adverin {

struct DomainStyle {
    double gamma = 1.0;
    double brightness = 0.0;
    double contrast = 1.0;
    double noise_sigma = 0.0;
    double bias_amp = 0.0;
};

struct GenConfig {
    int n_domains = 4;
    int per_domain = 100;
    int size = 64;
    std::uint64_t seed = 0;
};

std::vector<DomainStyle> builtin_styles(int n_domains);

// Nested-ellipse scene (disc with a strictly contained cup) pushed through the
// style pipeline; image lands in [-1, 1], truth channel 0 = disc, 1 = cup.
Sample generate_sample(const DomainStyle& style, int size, Rng& rng);

// Writes one container per sample plus manifest.csv into out_dir.
std::vector<ManifestEntry> generate_dataset(const GenConfig& cfg, const std::string& out_dir);

}  // namespace adverin

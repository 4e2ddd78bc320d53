#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace adverin {

// Single-channel raster with its recorded intensity range. The range is
// carried explicitly instead of being recomputed so that attacked images
// keep the original [vmin, vmax] by construction.
struct Image2D {
    int height = 0;
    int width = 0;
    std::vector<double> data;  // height*width, row-major
    double vmin = 0.0;
    double vmax = 0.0;

    double at(int y, int x) const { return data[static_cast<std::size_t>(y) * width + x]; }
    double& at(int y, int x) { return data[static_cast<std::size_t>(y) * width + x]; }
    std::size_t pixels() const { return data.size(); }
};

// Throws std::invalid_argument if the Image2D invariants fail: positive
// dims, data length, finite values, vmin <= min(data) <= max(data) <= vmax.
void validate(const Image2D& image);

// Per-class binary ground-truth channels; every value is exactly 0 or 1.
struct MaskChannels {
    int channels = 0;
    int height = 0;
    int width = 0;
    std::vector<double> data;  // channels*height*width

    double at(int c, int y, int x) const {
        return data[(static_cast<std::size_t>(c) * height + y) * width + x];
    }
    double& at(int c, int y, int x) {
        return data[(static_cast<std::size_t>(c) * height + y) * width + x];
    }
};

void validate(const MaskChannels& truth);

// Pixel labels from the k-means region split, values in [0, k).
struct RegionLabels {
    int height = 0;
    int width = 0;
    int k = 0;
    std::vector<int> labels;

    int at(int y, int x) const { return labels[static_cast<std::size_t>(y) * width + x]; }

    // Pixel count per label; labels absent from the partition show up as 0.
    std::vector<std::size_t> region_sizes() const;
};

void validate(const RegionLabels& labels);

struct BinaryMask {
    int height = 0;
    int width = 0;
    std::vector<std::uint8_t> data;  // 0 or 1

    std::uint8_t at(int y, int x) const { return data[static_cast<std::size_t>(y) * width + x]; }
    std::uint8_t& at(int y, int x) { return data[static_cast<std::size_t>(y) * width + x]; }
};

// One domain-tagged training case. region_labels is filled in by the
// preprocessing pass and required before any attack runs.
struct Sample {
    Image2D image;
    MaskChannels truth;
    int domain_id = 0;
    std::string sample_id;
    std::optional<RegionLabels> region_labels;
};

void validate(const Sample& sample);

}  // namespace adverin

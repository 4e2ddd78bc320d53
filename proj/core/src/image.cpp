#include "adverin/image.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace adverin {

void validate(const Image2D& image) {
    if (image.height <= 0 || image.width <= 0) {
        throw std::invalid_argument("Image2D: dimensions must be positive");
    }
    const std::size_t expect =
        static_cast<std::size_t>(image.height) * static_cast<std::size_t>(image.width);
    if (image.data.size() != expect) {
        throw std::invalid_argument("Image2D: data length does not match dimensions");
    }
    if (!std::isfinite(image.vmin) || !std::isfinite(image.vmax) || image.vmin > image.vmax) {
        throw std::invalid_argument("Image2D: invalid intensity range");
    }
    for (double v : image.data) {
        if (!std::isfinite(v)) {
            throw std::invalid_argument("Image2D: non-finite pixel value");
        }
        if (v < image.vmin || v > image.vmax) {
            throw std::invalid_argument("Image2D: pixel outside recorded range");
        }
    }
}

void validate(const MaskChannels& truth) {
    if (truth.channels <= 0 || truth.height <= 0 || truth.width <= 0) {
        throw std::invalid_argument("MaskChannels: dimensions must be positive");
    }
    const std::size_t expect = static_cast<std::size_t>(truth.channels) *
                               static_cast<std::size_t>(truth.height) *
                               static_cast<std::size_t>(truth.width);
    if (truth.data.size() != expect) {
        throw std::invalid_argument("MaskChannels: data length does not match dimensions");
    }
    for (double v : truth.data) {
        if (v != 0.0 && v != 1.0) {
            throw std::invalid_argument("MaskChannels: values must be exactly 0 or 1");
        }
    }
}

std::vector<std::size_t> RegionLabels::region_sizes() const {
    std::vector<std::size_t> sizes(static_cast<std::size_t>(k), 0);
    for (int v : labels) {
        sizes[static_cast<std::size_t>(v)]++;
    }
    return sizes;
}

void validate(const RegionLabels& labels) {
    if (labels.height <= 0 || labels.width <= 0 || labels.k <= 0) {
        throw std::invalid_argument("RegionLabels: dimensions and k must be positive");
    }
    const std::size_t expect =
        static_cast<std::size_t>(labels.height) * static_cast<std::size_t>(labels.width);
    if (labels.labels.size() != expect) {
        throw std::invalid_argument("RegionLabels: label count does not match dimensions");
    }
    for (int v : labels.labels) {
        if (v < 0 || v >= labels.k) {
            throw std::invalid_argument("RegionLabels: label outside [0, k)");
        }
    }
}

void validate(const Sample& sample) {
    validate(sample.image);
    validate(sample.truth);
    if (sample.truth.height != sample.image.height || sample.truth.width != sample.image.width) {
        throw std::invalid_argument("Sample: image and truth dimensions differ");
    }
    if (sample.region_labels) {
        validate(*sample.region_labels);
        if (sample.region_labels->height != sample.image.height ||
            sample.region_labels->width != sample.image.width) {
            throw std::invalid_argument("Sample: region labels dimensions differ");
        }
    }
    if (sample.sample_id.empty()) {
        throw std::invalid_argument("Sample: empty sample_id");
    }
}

}  // namespace adverin

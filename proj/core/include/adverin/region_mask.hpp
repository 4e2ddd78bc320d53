#pragma once

#include <cstdint>

#include "adverin/image.hpp"
#include "adverin/rng.hpp"

namespace adverin {

// Unsupervised split of an image into k regions by k-means over per-pixel
// features [sw*row/height, sw*col/width, normalized intensity]. Runs at
// preprocessing time; the labels are persisted with the sample so training
// never pays for clustering.
//
// Deterministic given the seed: k-means++ initialization from the artifact
// Rng, Lloyd iterations until stable or 50 rounds, distance ties broken to
// the lowest cluster index, empty clusters reseeded from the point
// currently farthest from its centroid.
RegionLabels compute_region_labels(const Image2D& image, int k, double spatial_weight,
                                   std::uint64_t seed);

// Binary attack mask: choose m distinct labels via the Rng and mark their
// pixels. Throws if m is outside [1, labels.k].
BinaryMask sample_mask(const RegionLabels& labels, int m, Rng& rng);

}  // namespace adverin

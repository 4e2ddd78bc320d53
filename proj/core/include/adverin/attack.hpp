#pragma once

#include <vector>

#include "adverin/image.hpp"
#include "adverin/intensity_map.hpp"
#include "adverin/rng.hpp"
#include "adverin/segnet.hpp"

namespace adverin {

struct AttackConfig {
    double delta = 2.0;
    int n_points = 10;
    int regions_total = 20;
    int regions_sampled = 5;
    double attack_prob = 1.0;
    bool enabled = true;
};

struct AttackResult {
    bool attacked = false;
    std::vector<double> rho_hat;
    BinaryMask mask;
    double loss_before = 0.0;
    double predicted_increase = 0.0;
};

// x' = M * f(x) + (1 - M) * x with a binary mask.
Image2D compose(const Image2D& image, const IntensityMapper& mapper, const BinaryMask& mask);

// Gradient of the loss wrt the mapping parameters at the identity map,
// given dL/dx at the unmodified image. Component 0 is the fixed gauge.
std::vector<double> grad_loss_wrt_rho(const std::vector<double>& d_input, const Image2D& image,
                                      const BinaryMask& mask, int n_points);

// Samples a region mask, takes one normalized gradient step of size delta.
AttackResult attack(const SegNet& net, const Sample& sample, const AttackConfig& cfg, Rng& rng);

Image2D apply_attack(const Sample& sample, const AttackResult& result);

// attack + apply; returns the unmodified image when the attack is skipped.
Image2D adverin_example(const SegNet& net, const Sample& sample, const AttackConfig& cfg,
                        Rng& rng);

}  // namespace adverin

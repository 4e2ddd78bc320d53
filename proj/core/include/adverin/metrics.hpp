#pragma once

#include <utility>
#include <vector>

#include "adverin/image.hpp"
#include "adverin/segnet.hpp"

namespace adverin {

enum class MaskFlag { ok, one_empty, both_empty };

const char* flag_name(MaskFlag flag);

struct ClassMetrics {
    double dice = 0.0;
    double hd95 = 0.0;
    MaskFlag flag = MaskFlag::ok;
};

struct CaseMetrics {
    std::vector<ClassMetrics> per_class;
};

// prob >= threshold selects foreground.
BinaryMask binarize(const Prediction& pred, int channel, double threshold = 0.5);
BinaryMask truth_mask(const MaskChannels& truth, int channel);

double dice(const BinaryMask& a, const BinaryMask& b);

// 95th-percentile symmetric boundary distance in pixels. Boundaries use
// 4-connectivity; P95 picks index ceil(0.95*len)-1 of the ascending list.
std::pair<double, MaskFlag> hd95(const BinaryMask& a, const BinaryMask& b);

CaseMetrics evaluate_case(const SegNet& net, const Sample& sample, double threshold = 0.5);

}  // namespace adverin

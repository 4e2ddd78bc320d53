#include "adverin/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace adverin {

namespace {

struct Point {
    int r, c;
};

void check_dims(const BinaryMask& a, const BinaryMask& b) {
    if (a.height != b.height || a.width != b.width) {
        throw std::invalid_argument("metrics: mask dims differ");
    }
}

std::size_t count_fg(const BinaryMask& m) {
    std::size_t n = 0;
    for (auto v : m.data) {
        n += v != 0;
    }
    return n;
}

std::vector<Point> boundary(const BinaryMask& m) {
    std::vector<Point> out;
    for (int r = 0; r < m.height; ++r) {
        for (int c = 0; c < m.width; ++c) {
            if (!m.at(r, c)) {
                continue;
            }
            const bool edge = r == 0 || !m.at(r - 1, c) || r == m.height - 1 ||
                              !m.at(r + 1, c) || c == 0 || !m.at(r, c - 1) ||
                              c == m.width - 1 || !m.at(r, c + 1);
            if (edge) {
                out.push_back({r, c});
            }
        }
    }
    return out;
}

double percentile95(std::vector<double>& sq_dists) {
    std::sort(sq_dists.begin(), sq_dists.end());
    const std::size_t len = sq_dists.size();
    const std::size_t idx = (19 * len + 19) / 20 - 1;  // ceil(0.95*len) - 1
    return std::sqrt(sq_dists[idx]);
}

std::vector<double> directed_sq(const std::vector<Point>& from, const std::vector<Point>& to) {
    std::vector<double> out;
    out.reserve(from.size());
    for (const Point& a : from) {
        double best = std::numeric_limits<double>::infinity();
        for (const Point& b : to) {
            const double dr = a.r - b.r;
            const double dc = a.c - b.c;
            best = std::min(best, dr * dr + dc * dc);
        }
        out.push_back(best);
    }
    return out;
}

}  // namespace

const char* flag_name(MaskFlag flag) {
    switch (flag) {
        case MaskFlag::ok: return "ok";
        case MaskFlag::one_empty: return "one_empty";
        case MaskFlag::both_empty: return "both_empty";
    }
    return "ok";
}

BinaryMask binarize(const Prediction& pred, int channel, double threshold) {
    if (channel < 0 || channel >= pred.channels) {
        throw std::invalid_argument("binarize: channel out of range");
    }
    BinaryMask m;
    m.height = pred.height;
    m.width = pred.width;
    const std::size_t hw = static_cast<std::size_t>(pred.height) * pred.width;
    m.data.resize(hw);
    const double* p = pred.probs.data() + static_cast<std::size_t>(channel) * hw;
    for (std::size_t i = 0; i < hw; ++i) {
        m.data[i] = p[i] >= threshold ? 1 : 0;
    }
    return m;
}

BinaryMask truth_mask(const MaskChannels& truth, int channel) {
    if (channel < 0 || channel >= truth.channels) {
        throw std::invalid_argument("truth_mask: channel out of range");
    }
    BinaryMask m;
    m.height = truth.height;
    m.width = truth.width;
    const std::size_t hw = static_cast<std::size_t>(truth.height) * truth.width;
    m.data.resize(hw);
    const double* p = truth.data.data() + static_cast<std::size_t>(channel) * hw;
    for (std::size_t i = 0; i < hw; ++i) {
        m.data[i] = p[i] != 0.0 ? 1 : 0;
    }
    return m;
}

double dice(const BinaryMask& a, const BinaryMask& b) {
    check_dims(a, b);
    std::size_t na = 0, nb = 0, inter = 0;
    for (std::size_t i = 0; i < a.data.size(); ++i) {
        const bool fa = a.data[i] != 0;
        const bool fb = b.data[i] != 0;
        na += fa;
        nb += fb;
        inter += fa && fb;
    }
    if (na + nb == 0) {
        return 1.0;
    }
    return 2.0 * static_cast<double>(inter) / static_cast<double>(na + nb);
}

std::pair<double, MaskFlag> hd95(const BinaryMask& a, const BinaryMask& b) {
    check_dims(a, b);
    const std::size_t na = count_fg(a);
    const std::size_t nb = count_fg(b);
    if (na == 0 && nb == 0) {
        return {0.0, MaskFlag::both_empty};
    }
    if (na == 0 || nb == 0) {
        const double h = a.height;
        const double w = a.width;
        return {std::sqrt(h * h + w * w), MaskFlag::one_empty};
    }
    const auto ba = boundary(a);
    const auto bb = boundary(b);
    auto ab = directed_sq(ba, bb);
    auto ba2 = directed_sq(bb, ba);
    return {std::max(percentile95(ab), percentile95(ba2)), MaskFlag::ok};
}

CaseMetrics evaluate_case(const SegNet& net, const Sample& sample, double threshold) {
    const Prediction pred = forward(net, sample.image);
    CaseMetrics out;
    out.per_class.reserve(static_cast<std::size_t>(pred.channels));
    for (int c = 0; c < pred.channels; ++c) {
        const BinaryMask p = binarize(pred, c, threshold);
        const BinaryMask t = truth_mask(sample.truth, c);
        ClassMetrics cm;
        cm.dice = dice(p, t);
        auto [h, flag] = hd95(p, t);
        cm.hd95 = h;
        cm.flag = flag;
        out.per_class.push_back(cm);
    }
    return out;
}

}  // namespace adverin

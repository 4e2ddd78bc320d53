#include "adverin/intensity_map.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace adverin {

namespace {

// Exponents are already shift-stabilized by the rho_j - rho_0 form; the
// clamp only guards adversarial fuzz inputs, never normal operation where
// ||rho|| <= delta <= 5.
constexpr double kExpClamp = 50.0;

double weight(double rho_j, double rho_0) {
    return std::exp(std::clamp(rho_j - rho_0, -kExpClamp, kExpClamp));
}

struct Bucket {
    int i;
    double frac;
};

Bucket bucket_of(int n, double t) {
    const double u = t * n;
    int i = static_cast<int>(std::floor(u));
    i = std::clamp(i, 0, n - 1);
    return {i, u - i};
}

void check_unit(double t) {
    if (!(t >= 0.0 && t <= 1.0)) {
        throw std::invalid_argument("intensity map: t outside [0, 1]");
    }
}

}  // namespace

IntensityMapper IntensityMapper::identity(int n) {
    if (n < 1) {
        throw std::invalid_argument("IntensityMapper: n must be >= 1");
    }
    return {n, std::vector<double>(static_cast<std::size_t>(n) + 1, 0.0)};
}

IntensityMapper IntensityMapper::from_rho(std::vector<double> rho) {
    if (rho.size() < 2) {
        throw std::invalid_argument("IntensityMapper: need at least 2 mapping points");
    }
    for (double r : rho) {
        if (!std::isfinite(r)) {
            throw std::invalid_argument("IntensityMapper: non-finite rho");
        }
    }
    const int n = static_cast<int>(rho.size()) - 1;
    return {n, std::move(rho)};
}

bool IntensityMapper::is_identity() const {
    for (double r : rho) {
        if (r != rho[0]) {
            return false;
        }
    }
    return true;
}

MappingCurve curve(const IntensityMapper& mapper) {
    const int n = mapper.n;
    MappingCurve c;
    c.knots.resize(static_cast<std::size_t>(n) + 1);
    std::vector<double> cum(static_cast<std::size_t>(n) + 1, 0.0);
    for (int j = 1; j <= n; ++j) {
        cum[j] = cum[j - 1] + weight(mapper.rho[j], mapper.rho[0]);
    }
    const double total = cum[n];  // > 0 always: sum of n >= 1 positive weights
    for (int i = 0; i <= n; ++i) {
        c.knots[i] = cum[i] / total;
    }
    return c;
}

double eval_unit(const MappingCurve& c, int n, double t) {
    check_unit(t);
    if (t >= 1.0) {
        return 1.0;
    }
    const auto [i, frac] = bucket_of(n, t);
    const double lo = c.knots[i];
    const double hi = c.knots[i + 1];
    const double v = lo + frac * (hi - lo);
    // Clamping only ever moves the value by an ulp; it keeps the
    // piecewise evaluation monotone across segment boundaries.
    return std::clamp(v, lo, hi);
}

double eval_unit(const IntensityMapper& mapper, double t) {
    check_unit(t);
    if (mapper.is_identity()) {
        return t;
    }
    return eval_unit(curve(mapper), mapper.n, t);
}

Image2D apply_image(const IntensityMapper& mapper, const Image2D& image) {
    if (mapper.is_identity() || image.vmax == image.vmin) {
        return image;
    }
    const double range = image.vmax - image.vmin;
    const MappingCurve c = curve(mapper);
    Image2D out = image;
    for (double& v : out.data) {
        const double t = (v - image.vmin) / range;
        const double mapped = range * eval_unit(c, mapper.n, t) + image.vmin;
        v = std::clamp(mapped, image.vmin, image.vmax);
    }
    return out;
}

std::vector<std::vector<double>> grad_knots(const IntensityMapper& mapper) {
    const int n = mapper.n;
    const MappingCurve c = curve(mapper);
    double total = 0.0;
    std::vector<double> w(static_cast<std::size_t>(n) + 1, 0.0);
    for (int j = 1; j <= n; ++j) {
        w[j] = weight(mapper.rho[j], mapper.rho[0]);
        total += w[j];
    }
    std::vector<std::vector<double>> g(
        static_cast<std::size_t>(n) + 1, std::vector<double>(static_cast<std::size_t>(n) + 1, 0.0));
    for (int i = 1; i < n; ++i) {
        for (int k = 1; k <= n; ++k) {
            const double indicator = (k <= i) ? 1.0 : 0.0;
            g[i][k] = (w[k] / total) * (indicator - c.knots[i]);
        }
    }
    return g;
}

void grad_pixel_into(const std::vector<std::vector<double>>& g, int n, double t,
                     std::vector<double>& out) {
    check_unit(t);
    const auto [i, frac] = bucket_of(n, t);
    out.assign(static_cast<std::size_t>(n) + 1, 0.0);
    const double a = 1.0 - frac;
    for (int k = 0; k <= n; ++k) {
        out[k] = a * g[i][k] + frac * g[i + 1][k];
    }
}

std::vector<double> grad_pixel(const IntensityMapper& mapper, double t) {
    std::vector<double> out;
    grad_pixel_into(grad_knots(mapper), mapper.n, t, out);
    return out;
}

}  // namespace adverin

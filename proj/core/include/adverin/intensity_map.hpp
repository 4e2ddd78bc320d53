#pragma once

#include <vector>

#include "adverin/image.hpp"

namespace adverin {

// Trainable monotonic intensity mapping on [0, 1]. The n+1 parameters rho
// define mapping points (i/n, knot[i]) through exponentiated cumulative
// sums; values between the points come from linear interpolation. The map
// is monotonically increasing and fixes 0 and 1 for every rho, and it is
// invariant under adding a constant to all rho (so rho[0] is a gauge
// direction and carries no gradient).
struct IntensityMapper {
    int n = 1;                // number of intervals; rho has n+1 entries
    std::vector<double> rho;  // rho[0..n]

    static IntensityMapper identity(int n);
    static IntensityMapper from_rho(std::vector<double> rho);

    // True when the mapper is exactly the identity on [0, 1]; all-equal
    // rho (including all zeros) qualifies by the gauge property.
    bool is_identity() const;
};

struct MappingCurve {
    std::vector<double> knots;  // knots[0] == 0, knots[n] == 1, non-decreasing
};

// Knot values knot[i] = sum_{j<=i} w_j / sum_{j<=n} w_j with
// w_j = exp(rho_j - rho_0) and the j = 0 term cancelled. knots[0] and
// knots[n] are exactly 0 and 1, and the sequence is non-decreasing even
// at the floating-point level (prefix sums of positive terms divided by
// the shared total).
MappingCurve curve(const IntensityMapper& mapper);

// Piecewise-linear evaluation of the curve at t in [0, 1]. Bucket
// i = floor(t*n) clamped to [0, n-1], frac = t*n - i. Endpoints are
// exact: eval_unit(., 0) == 0 and eval_unit(., 1) == 1.
double eval_unit(const IntensityMapper& mapper, double t);
double eval_unit(const MappingCurve& c, int n, double t);

// Per-pixel application over the image's recorded range:
//   out = (vmax - vmin) * f((x - vmin)/(vmax - vmin)) + vmin.
// Identity rho passes the image through bit-exactly. A constant-range
// image (vmax == vmin) is returned unchanged; there is no intensity
// order to remap. Output range equals the input range.
Image2D apply_image(const IntensityMapper& mapper, const Image2D& image);

// Dense Jacobian G with G[i][k] = d knot[i] / d rho[k]:
//   G[i][k] = (w_k / W) * ([k <= i] - knot[i])  for k >= 1,
//   G[i][0] = 0 (gauge), rows 0 and n identically zero.
std::vector<std::vector<double>> grad_knots(const IntensityMapper& mapper);

// d eval_unit(t) / d rho: linear interpolation of the two bracketing
// Jacobian rows, (1 - frac) * G[i] + frac * G[i+1].
std::vector<double> grad_pixel(const IntensityMapper& mapper, double t);

// Same, reusing a precomputed Jacobian; writes into out (size n+1).
void grad_pixel_into(const std::vector<std::vector<double>>& g, int n, double t,
                     std::vector<double>& out);

}  // namespace adverin

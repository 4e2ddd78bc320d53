#pragma once

#include <cstdint>

namespace adverin {

// |a - b| / max(1, |a|, |b|)
double rel_err(double a, double b);

// Central finite-difference audit of every analytic gradient: the mapping
// curve (knots and per-pixel), the network (parameters and input), and the
// end-to-end loss-wrt-rho chain through a masked compose. trials scales the
// case counts: `trials` net and rho cases, 10x trials curve cases.
//
// Probes whose activation pattern differs between the +h and -h evaluations
// straddle a ReLU or clamp kink and are skipped, not compared.
struct GradCheckReport {
    double max_err_curve = 0.0;
    double max_err_theta = 0.0;
    double max_err_input = 0.0;
    double max_err_rho = 0.0;
    double max_abs_g0 = 0.0;
    int curve_cases = 0;
    int net_cases = 0;
    int rho_cases = 0;
    long probes_total = 0;
    long probes_skipped = 0;

    bool pass(double tol_curve = 1e-6, double tol_net = 1e-4) const;
};

GradCheckReport run_gradcheck(int trials, std::uint64_t seed);

}  // namespace adverin

#ifndef RISKDUAL_GRID_HPP
#define RISKDUAL_GRID_HPP

#include <cstddef>
#include <vector>

namespace riskdual {

// Discretization of the dual (t, y) domain. The y grid is log-spaced on
// [y_min, y_max]; the time grid is uniform with n_t steps on [0, T].
//
// The tolerance fields below are scheme knobs with scale-aware defaults;
// every one of them is surfaced as a `grid.*` config key so that reports can
// snapshot the effective values.
struct GridSpec {
    double y_min = 1e-3;
    double y_max = 1e3;
    std::size_t n_y = 256;
    std::size_t n_t = 256;
    double cfl_safety = 1.0; // in (0, 1]

    // Scheme extensions.
    double rho_floor = 1e-6;       // lower edge of the control box
    double tol_convex = 1e-8;      // slack on discrete convexity checks
    double tau_region_scale = 1e-6; // region flag: |D_y v| <= scale * local value
    double policy_tol = 1e-9;      // policy-iteration fixed-point tolerance
    std::size_t policy_max_iter = 50;
    double tau_res_factor = 10.0;  // accepted-residual bound = factor * dt

    std::vector<double> make_y_nodes() const;
    std::vector<double> make_times(double horizon) const;
};

} // namespace riskdual

#endif // RISKDUAL_GRID_HPP

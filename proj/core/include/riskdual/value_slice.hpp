#ifndef RISKDUAL_VALUE_SLICE_HPP
#define RISKDUAL_VALUE_SLICE_HPP

#include <cstddef>
#include <vector>

#include "riskdual/errors.hpp"

namespace riskdual {

// One time layer of the dual value function on the log-spaced y grid,
// together with growth-matched extensions beyond the grid:
//
//   y <  y_min : power-law tail  c_lo * y^(-gamma)
//   y >  y_max : affine tail     slope * y + intercept
//
// Both tails are anchored at the boundary nodes so the extended function is
// continuous. The tails matter because the nonlocal operator samples the
// slice at rho_i * y, which routinely leaves the grid.
class ValueSlice {
public:
    ValueSlice() = default;

    // Takes ownership of the node/value arrays and fits both tails.
    ValueSlice(std::vector<double> y_nodes, std::vector<double> values,
               double time_label, double gamma);

    std::size_t size() const { return y_.size(); }
    const std::vector<double>& y_nodes() const { return y_; }
    const std::vector<double>& values() const { return v_; }
    double time_label() const { return t_; }
    double gamma() const { return gamma_; }

    double left_tail_coeff() const { return c_lo_; }
    double right_tail_slope() const { return slope_hi_; }
    double right_tail_intercept() const { return intercept_hi_; }

    // Mutable access for the solver; call refit_tails() after editing.
    std::vector<double>& mutable_values() { return v_; }
    void refit_tails();

    struct Eval {
        double value = 0.0;
        double derivative = 0.0; // one-sided slope of the active segment
    };

    // Piecewise-linear evaluation with tail extensions. Throws
    // NonpositiveQuery for y <= 0.
    Eval interpolate(double y) const;

    // Central difference at interior nodes, one-sided at the boundaries.
    double derivative_at(std::size_t j) const;

    bool all_finite() const;

private:
    std::vector<double> y_;
    std::vector<double> v_;
    double t_ = 0.0;
    double gamma_ = 1.0;
    double c_lo_ = 0.0;
    double slope_hi_ = 0.0;
    double intercept_hi_ = 0.0;
};

} // namespace riskdual

#endif // RISKDUAL_VALUE_SLICE_HPP

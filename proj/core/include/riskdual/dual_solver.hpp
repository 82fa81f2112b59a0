#ifndef RISKDUAL_DUAL_SOLVER_HPP
#define RISKDUAL_DUAL_SOLVER_HPP

#include <span>

#include "riskdual/dual_field.hpp"
#include "riskdual/hamiltonian.hpp"
#include "riskdual/model.hpp"

namespace riskdual {

struct SolveOptions {
    unsigned threads = 1; // 0 = hardware concurrency
};

// Solves the dual variational inequality
//
//   min { d_t v + H(t, y, v, d_y v), -d_y v } = 0,   v(T, y) = Utilde(y)
//
// backward in time on the log-y grid. Each step freezes the per-node
// minimizing distortions, takes a linearly implicit step (local value and
// upwinded transport implicit, nonlocal samples lagged), re-minimizes, and
// iterates to a fixed point; the obstacle is applied afterwards by isotonic
// projection. Sub-steps are inserted automatically, halving up to 2^6 times,
// when the macro step exceeds the stability bound.
DualField solve(const MarketModel& model, const CrraUtility& utility,
                const GridSpec& grid, const SolveOptions& opts = {});

// Same scheme from arbitrary terminal data (used by comparison tests).
DualField solve_with_terminal(const MarketModel& model, const CrraUtility& utility,
                              const GridSpec& grid,
                              std::span<const double> terminal_values,
                              const SolveOptions& opts = {});

// Largest nonincreasing function dominated by the slice: one running-minimum
// sweep in increasing y. This is the discrete action of the singular control,
// which can only move the dual state downward.
ValueSlice enforce_monotone(const ValueSlice& slice);

// Recomputes the discrete VI residual min{backward-difference + H, -D_y v}
// at every interior node and counts shape violations.
ResidualReport residual_check(const DualField& field, const MarketModel& model,
                              const CrraUtility& utility,
                              const SolveOptions& opts = {});

// Region flags from the solved field: R2 where the projection was active or
// the slice is locally flat, R1 where the PDE residual is within the scheme
// tolerance.
std::vector<std::vector<Region>> region_map(const DualField& field,
                                            const MarketModel& model,
                                            const SolveOptions& opts = {});

// Shape/growth audit of a solved field against the function-class bounds the
// dual value provably satisfies (monotone, convex, weighted growth, weighted
// difference quotient, exact terminal data).
struct FieldAudit {
    double terminal_max_abs_error = 0.0;
    long monotonicity_violations = 0;
    long convexity_violations = 0;
    double growth_max_ratio = 0.0; // max |v| / (y + y^-gamma) over all layers
    double growth_bound = 0.0;
    double diff_max_ratio = 0.0;   // adjacent difference-quotient ratio
    double diff_bound = 0.0;
    bool pass() const {
        return terminal_max_abs_error == 0.0 && monotonicity_violations == 0 &&
               convexity_violations == 0 && growth_max_ratio <= growth_bound &&
               diff_max_ratio <= diff_bound;
    }
};

FieldAudit audit_field(const DualField& field, const MarketModel& model,
                       const CrraUtility& utility);

} // namespace riskdual

#endif // RISKDUAL_DUAL_SOLVER_HPP

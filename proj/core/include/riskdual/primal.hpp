#ifndef RISKDUAL_PRIMAL_HPP
#define RISKDUAL_PRIMAL_HPP

#include <span>
#include <vector>

#include "riskdual/dual_field.hpp"
#include "riskdual/model.hpp"

namespace riskdual {

struct LegendreResult {
    double value = 0.0;
    double y_star = 0.0;
    bool boundary = false;    // minimizer pinned to a grid edge
    double time_offset = 0.0; // nearest-layer selection offset actually used
};

// Primal value by conjugate duality:
//   v(t, x) = min_y [ vtilde(t, y) + x y ],
// evaluated as the grid minimum refined by golden section between the
// bracketing nodes. Throws InfeasibleWealth below the feasibility threshold.
LegendreResult legendre(const DualField& field, const MarketModel& model,
                        double t, double x);

// Candidate optimal wealth x_hat(t, y) = -D_y vtilde(t, y). Central
// differences at the nodes, interpolated linearly between them, tail
// derivatives outside the grid.
double optimal_wealth_map(const DualField& field, double t, double y);

// Heuristic strategy read-off at (t, x): matches the wealth jump across each
// claim-distorted dual state against theta * delta_i. The consistency score
// is the spread of the per-claim estimates; large spread means the read-off
// is unreliable and simulation-based policy search should be preferred.
struct StrategyEstimate {
    double theta_hat = 1.0;   // in [0, 1]
    double consistency = 0.0; // max_i |theta_i - theta_hat|
};

StrategyEstimate candidate_strategy(const DualField& field, const MarketModel& model,
                                    double t, double x);

// Primal layer over a wealth grid, exportable as CSV.
struct PrimalSlice {
    double t = 0.0;
    std::vector<double> x_nodes;
    std::vector<double> value;
    std::vector<double> y_star;
    std::vector<double> theta_hat;
    std::vector<double> consistency;
};

PrimalSlice transform_slice(const DualField& field, const MarketModel& model,
                            double t, std::span<const double> x_nodes);

} // namespace riskdual

#endif // RISKDUAL_PRIMAL_HPP

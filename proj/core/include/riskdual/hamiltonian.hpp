#ifndef RISKDUAL_HAMILTONIAN_HPP
#define RISKDUAL_HAMILTONIAN_HPP

#include <cstddef>
#include <span>
#include <vector>

#include "riskdual/model.hpp"
#include "riskdual/value_slice.hpp"

namespace riskdual {

// Compact control box for the claim-intensity distortion rho. One scalar
// range per claim coordinate; the cap must dominate both 1 and
// rho_bar = beta / min_i(delta_i * pi_i), the level beyond which the premium
// positive part is certainly closed.
struct ControlBox {
    double rho_floor = 1e-6;
    double rho_cap = 10.0;
};

// Node-dependent box: cap = max(rho_bar, y_max / y_node, 10).
ControlBox node_control_box(const MarketModel& model, double y_node,
                            double y_max, double rho_floor = 1e-6);

// beta / min_i(delta_i * pi_i); zero when the claim menu is empty.
double rho_bar(const MarketModel& model);

struct HamiltonianResult {
    double value = 0.0;
    std::vector<double> minimizer;       // one rho per claim type
    enum class Regime { A, B } regime = Regime::A; // A: sum rho_i delta_i pi_i >= beta
    long evaluations = 0;                // objective calls spent
    bool floor_hit = false;              // some rho_i stuck to the box floor
    bool cap_hit = false;                // some rho_i stuck to the box cap
};

// Nonlocal operator
//   A^rho = sum_i pi_i * ( v(rho_i y) - v(y) - (rho_i - 1) y p )
// where p is the caller-supplied derivative D_y v at y and off-grid values
// come from the slice interpolation.
double a_rho(const ValueSlice& slice, double y, double p,
             std::span<const double> rho, const MarketModel& model);

// Premium running-cost rate factor alpha - beta + (beta - sum rho_i delta_i pi_i)_+.
double premium_rate(const MarketModel& model, std::span<const double> rho);

// Minimizes  A^rho + y * premium_rate(rho)  over the control box at grid
// node `node_index` of `slice`. The derivative entering A^rho is the central
// difference at interior nodes and one-sided at the boundaries.
//
// The search exploits the two-regime structure of the positive part: with
// the part open (regime B) the objective separates into d independent 1-D
// problems; with it closed (regime A) it separates subject to the linear
// constraint sum rho_i delta_i pi_i >= beta, handled by a multiplier sweep.
// Each 1-D problem is solved by log-spaced seeding followed by
// golden-section refinement; no convexity of the slice is assumed.
HamiltonianResult minimize_hamiltonian(const ValueSlice& slice,
                                       std::size_t node_index,
                                       const MarketModel& model,
                                       const ControlBox& box);

} // namespace riskdual

#endif // RISKDUAL_HAMILTONIAN_HPP

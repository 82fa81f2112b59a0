#ifndef RISKDUAL_DUAL_FIELD_HPP
#define RISKDUAL_DUAL_FIELD_HPP

#include <cstddef>
#include <vector>

#include "riskdual/grid.hpp"
#include "riskdual/value_slice.hpp"

namespace riskdual {

// Node classification of the variational inequality:
//   R1 "no-jump"  : the PDE branch d_t v + H = 0 is active
//   R2 "jump"     : the obstacle branch -d_y v = 0 is active
// None marks a node where neither branch holds within tolerance; accepted
// solves have no such nodes.
enum class Region : unsigned char { None = 0, R1 = 1, R2 = 2, Both = 3 };

inline bool has_r1(Region r) { return static_cast<unsigned char>(r) & 1u; }
inline bool has_r2(Region r) { return static_cast<unsigned char>(r) & 2u; }

// Solved dual value field on the full time x log-y lattice, together with
// the per-node minimizing distortions and region flags.
struct DualField {
    GridSpec grid;
    double gamma = 1.0;
    std::vector<double> times;                            // n_t + 1 layers
    std::vector<ValueSlice> slices;                       // one per layer
    std::vector<std::vector<std::vector<double>>> controls; // [time][node][claim]
    std::vector<std::vector<Region>> regions;             // [time][node]
    std::vector<std::vector<unsigned char>> proj_active;  // isotonic projection hit

    // Box-edge diagnostics accumulated over the whole solve (the control
    // floor/cap should never attract minimizers on healthy problems).
    long floor_sticks = 0;
    long cap_sticks = 0;

    std::size_t n_layers() const { return slices.size(); }
    std::size_t n_nodes() const { return slices.empty() ? 0 : slices.front().size(); }
    double dt() const {
        return times.size() > 1 ? times[1] - times[0] : 0.0;
    }

    // Index of the time layer closest to t, and the offset incurred.
    std::size_t nearest_layer(double t, double* offset = nullptr) const;
};

struct ResidualReport {
    double max_vi_residual = 0.0;
    std::size_t worst_time = 0;
    std::size_t worst_node = 0;
    long monotonicity_violations = 0;
    long convexity_violations = 0;
    // Per-node detail |min{dt-difference + H, -D_y v}|, one row per interior
    // layer; exported to residuals.csv.
    std::vector<std::vector<double>> node_residuals;
};

} // namespace riskdual

#endif // RISKDUAL_DUAL_FIELD_HPP

#ifndef RISKDUAL_SIMULATOR_HPP
#define RISKDUAL_SIMULATOR_HPP

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "riskdual/dual_field.hpp"
#include "riskdual/model.hpp"

namespace riskdual {

struct SimSpec {
    std::size_t n_paths = 10000;
    double dt = 0.01;        // drift integration / strategy lookup spacing
    std::uint64_t seed = 1;
    bool antithetic = false;
    unsigned threads = 1;    // 0 = hardware concurrency
};

// Feedback table theta(t, x): nearest time row, linear interpolation in x,
// clamped at the grid edges.
struct FeedbackTable {
    std::vector<double> times;                // ascending
    std::vector<double> x_nodes;              // ascending
    std::vector<std::vector<double>> theta;   // [time][x]

    double lookup(double t, double x) const;
};

struct Strategy {
    enum class Kind { Zero, Full, Constant, Table };
    Kind kind = Kind::Full;
    double constant = 1.0;
    FeedbackTable table;

    static Strategy zero() { return {Kind::Zero, 0.0, {}}; }
    static Strategy full() { return {Kind::Full, 1.0, {}}; }
    static Strategy constant_theta(double c) { return {Kind::Constant, c, {}}; }
    static Strategy feedback(FeedbackTable t) { return {Kind::Table, 0.0, std::move(t)}; }

    double raw_theta(double t, double x) const;
};

struct SimReport {
    double estimate = 0.0;      // sample mean of U(X_T)
    double ci_half_width = 0.0; // 95% normal-approximation half width
    long ruin_count = 0;        // paths where the admissibility projection bound bit
    std::size_t paths_used = 0;
    std::uint64_t seed = 0;
};

struct TraceEvent {
    std::size_t path = 0;
    double t = 0.0;
    double x = 0.0;
    double theta = 0.0;
    std::string event; // start | lookup | claim | end
};

// Simulates wealth paths under the compound-Poisson claim flow and the given
// strategy. Claim times are exact exponential interarrivals; dt affects only
// drift integration and strategy lookups. At every lookup (and immediately
// after every claim) theta is projected onto
//   [0, min(1, (X - b(u)) / delta_max)]
// so that no single claim can push wealth below the feasibility floor.
// When `trace` is non-null the first 100 paths log their events into it.
SimReport simulate(const MarketModel& model, const CrraUtility& utility,
                   const Strategy& strategy, double t0, double x0,
                   const SimSpec& spec, std::vector<TraceEvent>* trace = nullptr);

// Desk-scale backward-induction oracle for the primal value. Linear
// interpolation in wealth, theta maximized over a uniform grid intersected
// with the admissible interval. Throws ScaleExceeded beyond d <= 2,
// t_steps <= 64, x_count <= 512.
struct DpTable {
    std::vector<double> times;
    std::vector<double> x_nodes;
    std::vector<std::vector<double>> value; // [time][x]

    double at(double t, double x) const;
};

DpTable brute_force_primal_dp(const MarketModel& model, const CrraUtility& utility,
                              std::size_t t_steps, std::size_t x_count,
                              std::size_t theta_count, double x_max);

// Certifies the Monte Carlo lower bound against the dual upper bounds
// vtilde(0, y) + x0 * y over a probe set.
struct WeakDualityReport {
    double lower_bound = 0.0;
    double lower_bound_ci = 0.0;
    std::string best_strategy;
    double best_upper = 0.0;
    double best_upper_y = 0.0;
    double tightest_gap = 0.0;  // best_upper - lower_bound
    double gap_fraction = 0.0;  // tightest_gap / |best_upper|
    bool pass = false;          // lower bound below every probe bound + 2 CI
};

WeakDualityReport weak_duality_check(const MarketModel& model, const CrraUtility& utility,
                                     const DualField& field, double x0,
                                     std::span<const double> y_probes,
                                     const SimSpec& spec,
                                     std::span<const Strategy> candidates,
                                     std::span<const std::string> candidate_names = {});

} // namespace riskdual

#endif // RISKDUAL_SIMULATOR_HPP

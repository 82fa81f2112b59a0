#ifndef RISKDUAL_VERIFY_HPP
#define RISKDUAL_VERIFY_HPP

#include <string>
#include <vector>

#include "riskdual/config.hpp"
#include "riskdual/dual_field.hpp"
#include "riskdual/io.hpp"
#include "riskdual/simulator.hpp"

namespace riskdual {

struct VerifyOptions {
    unsigned threads = 1;
    // When set and the file exists, checks run against this exported field
    // instead of a fresh solve (fault-injection entry point).
    std::string field_csv;
};

// Runs the consolidated invariant and two-oracle suite on a validated
// config: terminal exactness, shape audits, VI residual, terminal
// biconjugacy, DP agreement, weak duality and the constant-distortion
// feasible bound. One row per check.
std::vector<CheckRow> run_verification(const ProblemConfig& cfg,
                                       const VerifyOptions& opts = {});

bool all_pass(const std::vector<CheckRow>& rows);

// Feedback strategy table distilled from the primal read-off: at most
// max_rows time layers, nx wealth nodes between x_lo and x_hi; infeasible
// cells hold theta = 0.
FeedbackTable build_feedback_table(const DualField& field, const MarketModel& model,
                                   double x_lo, double x_hi, std::size_t nx,
                                   std::size_t max_rows);

// Probe sets shared by verification and reports.
std::vector<double> default_y_probes();
std::vector<double> biconjugacy_x_probes();

} // namespace riskdual

#endif // RISKDUAL_VERIFY_HPP

#ifndef RISKDUAL_CONFIG_HPP
#define RISKDUAL_CONFIG_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "riskdual/grid.hpp"
#include "riskdual/model.hpp"
#include "riskdual/simulator.hpp"

namespace riskdual {

// Complete description of one problem instance. A single seed governs every
// stochastic output derived from the config.
struct ProblemConfig {
    MarketModel model;
    double eta = 0.5;
    GridSpec grid;
    SimSpec sim;
    std::uint64_t seed = 1;
    double sim_t0 = 0.0; // simulation start point (sim.t0 / sim.x0 keys)
    double sim_x0 = 1.0;

    CrraUtility utility() const { return CrraUtility(eta); }
};

enum class ConfigIssueCode {
    NegativeRate,
    EmptyClaims,
    WeightsNotNormalized,
    BadEta,
    BadHorizon,
    NonpositiveClaim,
    BadGrid,
    BadSim,
};

const char* to_string(ConfigIssueCode code);

struct ConfigIssue {
    ConfigIssueCode code;
    std::string detail;
};

struct Validated {
    std::optional<ProblemConfig> config; // set iff issues is empty
    std::vector<ConfigIssue> issues;
    bool ok() const { return issues.empty(); }
};

// Normalizes (claims sorted and deduplicated, weights renormalized when
// within 1e-9 of one, sim seed tied to the master seed) and returns either
// the normalized config or the complete list of violated invariants.
Validated validate(ProblemConfig cfg);

// Line-oriented UTF-8 key=value reader; '#' starts a comment. Keys use the
// section prefixes model., utility., grid., sim. plus the bare `seed`; the
// claim menu is `model.claims = delta:prob, delta:prob, ...`.
class ConfigParseError : public Error {
public:
    ConfigParseError(int line, const std::string& what)
        : Error("config line " + std::to_string(line) + ": " + what), line_(line) {}
    int line() const { return line_; }

private:
    int line_;
};

ProblemConfig parse_config_file(const std::string& path);
ProblemConfig parse_config_text(const std::string& text);

} // namespace riskdual

#endif // RISKDUAL_CONFIG_HPP

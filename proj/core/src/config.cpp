#include "riskdual/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace riskdual {

const char* to_string(ConfigIssueCode code) {
    switch (code) {
        case ConfigIssueCode::NegativeRate: return "NegativeRate";
        case ConfigIssueCode::EmptyClaims: return "EmptyClaims";
        case ConfigIssueCode::WeightsNotNormalized: return "WeightsNotNormalized";
        case ConfigIssueCode::BadEta: return "BadEta";
        case ConfigIssueCode::BadHorizon: return "BadHorizon";
        case ConfigIssueCode::NonpositiveClaim: return "NonpositiveClaim";
        case ConfigIssueCode::BadGrid: return "BadGrid";
        case ConfigIssueCode::BadSim: return "BadSim";
    }
    return "Unknown";
}

Validated validate(ProblemConfig cfg) {
    Validated out;
    auto issue = [&](ConfigIssueCode code, const std::string& detail) {
        out.issues.push_back({code, detail});
    };

    if (cfg.model.alpha < 0.0) issue(ConfigIssueCode::NegativeRate, "model.alpha < 0");
    if (cfg.model.beta < 0.0) issue(ConfigIssueCode::NegativeRate, "model.beta < 0");
    if (cfg.model.intensity < 0.0) issue(ConfigIssueCode::NegativeRate, "model.intensity < 0");
    if (!(cfg.model.horizon > 0.0)) issue(ConfigIssueCode::BadHorizon, "model.horizon <= 0");
    if (cfg.model.intensity > 0.0 && cfg.model.claims.empty())
        issue(ConfigIssueCode::EmptyClaims, "intensity > 0 with empty claim menu");

    for (const Claim& c : cfg.model.claims) {
        if (!(c.delta > 0.0)) issue(ConfigIssueCode::NonpositiveClaim, "claim size <= 0");
        if (!(c.prob > 0.0)) issue(ConfigIssueCode::NonpositiveClaim, "claim weight <= 0");
    }

    if (!cfg.model.claims.empty()) {
        double total = 0.0;
        for (const Claim& c : cfg.model.claims) total += c.prob;
        if (std::abs(total - 1.0) > 1e-9) {
            std::ostringstream msg;
            msg << "claim weights sum to " << total;
            issue(ConfigIssueCode::WeightsNotNormalized, msg.str());
        } else if (total > 0.0) {
            for (Claim& c : cfg.model.claims) c.prob /= total;
        }
    }

    if (!(cfg.eta > 0.0) || !(cfg.eta < 1.0))
        issue(ConfigIssueCode::BadEta, "utility.eta outside (0, 1)");

    const GridSpec& g = cfg.grid;
    if (!(g.y_min > 0.0 && g.y_min < 1.0 && g.y_max > 1.0))
        issue(ConfigIssueCode::BadGrid, "need 0 < y_min < 1 < y_max");
    if (g.n_y < 16) issue(ConfigIssueCode::BadGrid, "grid.n_y < 16");
    if (g.n_t < 4) issue(ConfigIssueCode::BadGrid, "grid.n_t < 4");
    if (!(g.cfl_safety > 0.0 && g.cfl_safety <= 1.0))
        issue(ConfigIssueCode::BadGrid, "grid.cfl_safety outside (0, 1]");
    if (!(g.rho_floor > 0.0)) issue(ConfigIssueCode::BadGrid, "grid.rho_floor <= 0");
    if (!(g.tol_convex > 0.0) || !(g.tau_region_scale > 0.0) || !(g.policy_tol > 0.0) ||
        !(g.tau_res_factor > 0.0) || g.policy_max_iter == 0)
        issue(ConfigIssueCode::BadGrid, "nonpositive solver tolerance");

    if (cfg.sim.n_paths < 100) issue(ConfigIssueCode::BadSim, "sim.n_paths < 100");
    if (!(cfg.sim.dt > 0.0) || cfg.sim.dt > cfg.model.horizon)
        issue(ConfigIssueCode::BadSim, "sim.dt outside (0, T]");
    if (cfg.sim_t0 < 0.0 || cfg.sim_t0 > cfg.model.horizon)
        issue(ConfigIssueCode::BadSim, "sim.t0 outside [0, T]");

    if (!out.ok()) return out;

    if (cfg.sim_x0 < feasibility_threshold(cfg.model, cfg.sim_t0))
        issue(ConfigIssueCode::BadSim, "sim.x0 below the feasibility threshold");
    if (!out.ok()) return out;

    // Canonical ordering: sizes strictly increasing, exact duplicates merged.
    std::sort(cfg.model.claims.begin(), cfg.model.claims.end(),
              [](const Claim& a, const Claim& b) { return a.delta < b.delta; });
    std::vector<Claim> merged;
    for (const Claim& c : cfg.model.claims) {
        if (!merged.empty() && merged.back().delta == c.delta)
            merged.back().prob += c.prob;
        else
            merged.push_back(c);
    }
    cfg.model.claims = std::move(merged);

    cfg.sim.seed = cfg.seed;
    out.config = std::move(cfg);
    return out;
}

namespace {

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

double parse_double(const std::string& v, int line) {
    std::size_t used = 0;
    double out = 0.0;
    try {
        out = std::stod(v, &used);
    } catch (const std::exception&) {
        throw ConfigParseError(line, "expected a number, got '" + v + "'");
    }
    if (used != v.size())
        throw ConfigParseError(line, "trailing characters after number in '" + v + "'");
    return out;
}

std::uint64_t parse_u64(const std::string& v, int line) {
    std::size_t used = 0;
    unsigned long long out = 0;
    try {
        out = std::stoull(v, &used);
    } catch (const std::exception&) {
        throw ConfigParseError(line, "expected an unsigned integer, got '" + v + "'");
    }
    if (used != v.size())
        throw ConfigParseError(line, "trailing characters after integer in '" + v + "'");
    return out;
}

bool parse_bool(const std::string& v, int line) {
    if (v == "true" || v == "1") return true;
    if (v == "false" || v == "0") return false;
    throw ConfigParseError(line, "expected true/false, got '" + v + "'");
}

std::vector<Claim> parse_claims(const std::string& v, int line) {
    std::vector<Claim> claims;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (item.empty())
            throw ConfigParseError(line, "empty entry in claim list");
        const auto colon = item.find(':');
        if (colon == std::string::npos)
            throw ConfigParseError(line, "claim entry '" + item + "' is not delta:prob");
        Claim c;
        c.delta = parse_double(trim(item.substr(0, colon)), line);
        c.prob = parse_double(trim(item.substr(colon + 1)), line);
        claims.push_back(c);
    }
    if (claims.empty())
        throw ConfigParseError(line, "model.claims has no entries");
    return claims;
}

} // namespace

ProblemConfig parse_config_text(const std::string& text) {
    ProblemConfig cfg;
    std::stringstream stream(text);
    std::string raw;
    int line_no = 0;
    while (std::getline(stream, raw)) {
        ++line_no;
        const auto hash = raw.find('#');
        if (hash != std::string::npos) raw.erase(hash);
        const std::string line = trim(raw);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigParseError(line_no, "expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (value.empty()) throw ConfigParseError(line_no, "empty value for " + key);

        if (key == "model.alpha") cfg.model.alpha = parse_double(value, line_no);
        else if (key == "model.beta") cfg.model.beta = parse_double(value, line_no);
        else if (key == "model.intensity") cfg.model.intensity = parse_double(value, line_no);
        else if (key == "model.horizon") cfg.model.horizon = parse_double(value, line_no);
        else if (key == "model.claims") cfg.model.claims = parse_claims(value, line_no);
        else if (key == "utility.eta") cfg.eta = parse_double(value, line_no);
        else if (key == "grid.y_min") cfg.grid.y_min = parse_double(value, line_no);
        else if (key == "grid.y_max") cfg.grid.y_max = parse_double(value, line_no);
        else if (key == "grid.n_y") cfg.grid.n_y = parse_u64(value, line_no);
        else if (key == "grid.n_t") cfg.grid.n_t = parse_u64(value, line_no);
        else if (key == "grid.cfl_safety") cfg.grid.cfl_safety = parse_double(value, line_no);
        else if (key == "grid.rho_floor") cfg.grid.rho_floor = parse_double(value, line_no);
        else if (key == "grid.tol_convex") cfg.grid.tol_convex = parse_double(value, line_no);
        else if (key == "grid.tau_region_scale") cfg.grid.tau_region_scale = parse_double(value, line_no);
        else if (key == "grid.policy_tol") cfg.grid.policy_tol = parse_double(value, line_no);
        else if (key == "grid.policy_max_iter") cfg.grid.policy_max_iter = parse_u64(value, line_no);
        else if (key == "grid.tau_res_factor") cfg.grid.tau_res_factor = parse_double(value, line_no);
        else if (key == "sim.n_paths") cfg.sim.n_paths = parse_u64(value, line_no);
        else if (key == "sim.dt") cfg.sim.dt = parse_double(value, line_no);
        else if (key == "sim.antithetic") cfg.sim.antithetic = parse_bool(value, line_no);
        else if (key == "sim.x0") cfg.sim_x0 = parse_double(value, line_no);
        else if (key == "sim.t0") cfg.sim_t0 = parse_double(value, line_no);
        else if (key == "seed") cfg.seed = parse_u64(value, line_no);
        else throw ConfigParseError(line_no, "unknown key '" + key + "'");
    }
    return cfg;
}

ProblemConfig parse_config_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigParseError(0, "cannot open '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config_text(buf.str());
}

} // namespace riskdual

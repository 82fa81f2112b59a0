#include "riskdual/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "riskdual/parallel.hpp"
#include "riskdual/rng.hpp"

namespace riskdual {

double FeedbackTable::lookup(double t, double x) const {
    if (times.empty() || x_nodes.empty()) return 1.0;
    std::size_t row = 0;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < times.size(); ++k) {
        const double d = std::abs(times[k] - t);
        if (d < best) {
            best = d;
            row = k;
        }
    }
    const std::vector<double>& th = theta[row];
    if (x <= x_nodes.front()) return th.front();
    if (x >= x_nodes.back()) return th.back();
    const auto it = std::upper_bound(x_nodes.begin(), x_nodes.end(), x);
    const std::size_t hi = static_cast<std::size_t>(it - x_nodes.begin());
    const std::size_t lo = hi - 1;
    const double w = (x - x_nodes[lo]) / (x_nodes[hi] - x_nodes[lo]);
    return (1.0 - w) * th[lo] + w * th[hi];
}

double Strategy::raw_theta(double t, double x) const {
    switch (kind) {
        case Kind::Zero: return 0.0;
        case Kind::Full: return 1.0;
        case Kind::Constant: return std::clamp(constant, 0.0, 1.0);
        case Kind::Table: return std::clamp(table.lookup(t, x), 0.0, 1.0);
    }
    return 1.0;
}

namespace {

struct PathOutcome {
    double terminal_utility = 0.0;
    bool projection_bound = false;
};

PathOutcome run_path(const MarketModel& model, const CrraUtility& utility,
                     const Strategy& strategy, double t0, double x0,
                     double dt, UniformSource& u, std::size_t path_index,
                     std::vector<TraceEvent>* buf) {
    const double T = model.horizon;
    const double delta_max = model.max_claim();
    const bool has_claims = model.intensity > 0.0 && !model.claims.empty();

    PathOutcome out;
    double t_anchor = t0;
    double x_anchor = x0;
    double theta = 0.0;
    double rate = 0.0;

    auto log_event = [&](double t, double x, const char* ev) {
        if (buf) buf->push_back({path_index, t, x, theta, ev});
    };

    // Project the raw strategy value onto the admissible interval
    // [0, min(1, (x - b(t)) / delta_max)] and remember whether the wealth
    // cap actually bit.
    auto project = [&](double t, double x) {
        const double raw = strategy.raw_theta(t, x);
        double cap = 1.0;
        if (delta_max > 0.0) {
            const double b = feasibility_threshold(model, t);
            cap = std::min(1.0, (x - b) / delta_max);
        }
        if (raw > cap) out.projection_bound = true;
        return std::clamp(raw, 0.0, std::max(0.0, cap));
    };

    theta = project(t0, x0);
    rate = model.alpha - model.beta * (1.0 - theta);
    log_event(t0, x0, "start");

    std::size_t lookup_idx = 1;
    double next_lookup = t0 + dt;
    double next_claim = std::numeric_limits<double>::infinity();
    if (has_claims) next_claim = t0 - std::log(u.next()) / model.intensity;

    while (std::min(next_lookup, next_claim) < T) {
        if (next_claim <= next_lookup) {
            // Claim: settle drift up to the jump, then drop theta * z. The
            // retained fraction is the one held since the last (predictable)
            // lookup.
            double x_now = x_anchor + rate * (next_claim - t_anchor);
            const double uz = u.next();
            double acc = 0.0;
            double z = model.claims.back().delta;
            for (const Claim& c : model.claims) {
                acc += c.prob;
                if (uz <= acc) {
                    z = c.delta;
                    break;
                }
            }
            x_now -= theta * z;
            t_anchor = next_claim;
            x_anchor = x_now;
            log_event(t_anchor, x_now, "claim");
            // Re-arm the retention immediately so a burst of claims cannot
            // step over the feasibility floor.
            const double theta_new = project(t_anchor, x_now);
            if (theta_new != theta) {
                theta = theta_new;
                rate = model.alpha - model.beta * (1.0 - theta);
            }
            next_claim = t_anchor - std::log(u.next()) / model.intensity;
        } else {
            const double t_now = next_lookup;
            const double x_now = x_anchor + rate * (t_now - t_anchor);
            const double theta_new = project(t_now, x_now);
            if (theta_new != theta) {
                theta = theta_new;
                rate = model.alpha - model.beta * (1.0 - theta);
                t_anchor = t_now;
                x_anchor = x_now;
            }
            log_event(t_now, x_now, "lookup");
            ++lookup_idx;
            next_lookup = t0 + static_cast<double>(lookup_idx) * dt;
        }
    }

    const double x_terminal = x_anchor + rate * (T - t_anchor);
    log_event(T, x_terminal, "end");
    out.terminal_utility = utility.u(std::max(x_terminal, 0.0));
    return out;
}

} // namespace

SimReport simulate(const MarketModel& model, const CrraUtility& utility,
                   const Strategy& strategy, double t0, double x0,
                   const SimSpec& spec, std::vector<TraceEvent>* trace) {
    if (t0 < 0.0 || t0 > model.horizon)
        throw Error("simulate: t0 outside [0, T]");
    const double threshold = feasibility_threshold(model, t0);
    if (x0 < threshold) throw InfeasibleStart(x0, threshold);
    if (spec.n_paths == 0) throw Error("simulate: n_paths must be positive");
    if (!(spec.dt > 0.0) || spec.dt > model.horizon)
        throw Error("simulate: dt must lie in (0, T]");

    const std::size_t n = spec.n_paths;
    const std::size_t n_traced = trace ? std::min<std::size_t>(n, 100) : 0;
    std::vector<double> vals(n);
    std::vector<unsigned char> bound(n, 0);
    std::vector<std::vector<TraceEvent>> bufs(n_traced);

    parallel_for(n, spec.threads, [&](std::size_t p) {
        const std::uint64_t stream = spec.antithetic ? (p & ~1ull) : p;
        UniformSource u{PathRng(spec.seed, stream), spec.antithetic && (p % 2 == 1)};
        std::vector<TraceEvent>* buf = p < n_traced ? &bufs[p] : nullptr;
        const PathOutcome o =
            run_path(model, utility, strategy, t0, x0, spec.dt, u, p, buf);
        vals[p] = o.terminal_utility;
        bound[p] = o.projection_bound ? 1 : 0;
    });

    if (trace)
        for (auto& b : bufs) trace->insert(trace->end(), b.begin(), b.end());

    SimReport report;
    report.paths_used = n;
    report.seed = spec.seed;
    for (unsigned char r : bound) report.ruin_count += r;

    const auto [mn, mx] = std::minmax_element(vals.begin(), vals.end());
    if (*mn == *mx) {
        // Degenerate sample: the mean is the common value, exactly.
        report.estimate = *mn;
        report.ci_half_width = 0.0;
        return report;
    }
    double sum = 0.0;
    for (double v : vals) sum += v;
    const double mean = sum / static_cast<double>(n);
    double ss = 0.0;
    for (double v : vals) ss += (v - mean) * (v - mean);
    const double var = ss / static_cast<double>(n - 1);
    report.estimate = mean;
    report.ci_half_width = 1.959963984540054 * std::sqrt(var / static_cast<double>(n));
    return report;
}

double DpTable::at(double t, double x) const {
    std::size_t row = 0;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < times.size(); ++k) {
        const double d = std::abs(times[k] - t);
        if (d < best) {
            best = d;
            row = k;
        }
    }
    const std::vector<double>& v = value[row];
    if (x <= x_nodes.front()) return v.front();
    const std::size_t n = x_nodes.size();
    if (x >= x_nodes.back()) {
        const double slope = (v[n - 1] - v[n - 2]) / (x_nodes[n - 1] - x_nodes[n - 2]);
        return v[n - 1] + slope * (x - x_nodes[n - 1]);
    }
    const auto it = std::upper_bound(x_nodes.begin(), x_nodes.end(), x);
    const std::size_t hi = static_cast<std::size_t>(it - x_nodes.begin());
    const std::size_t lo = hi - 1;
    const double w = (x - x_nodes[lo]) / (x_nodes[hi] - x_nodes[lo]);
    return (1.0 - w) * v[lo] + w * v[hi];
}

DpTable brute_force_primal_dp(const MarketModel& model, const CrraUtility& utility,
                              std::size_t t_steps, std::size_t x_count,
                              std::size_t theta_count, double x_max) {
    if (model.claim_count() > 2)
        throw ScaleExceeded("brute_force_primal_dp: more than 2 claim types");
    if (t_steps > 64) throw ScaleExceeded("brute_force_primal_dp: t_steps > 64");
    if (x_count > 512) throw ScaleExceeded("brute_force_primal_dp: x_count > 512");
    if (t_steps < 1 || x_count < 2 || theta_count < 2 || !(x_max > 0.0))
        throw ScaleExceeded("brute_force_primal_dp: degenerate request");
    const double T = model.horizon;
    const double dt = T / static_cast<double>(t_steps);
    if (model.intensity * dt > 1.0)
        throw ScaleExceeded("brute_force_primal_dp: t_steps too small for intensity");

    DpTable table;
    table.times.resize(t_steps + 1);
    for (std::size_t k = 0; k <= t_steps; ++k)
        table.times[k] = T * static_cast<double>(k) / static_cast<double>(t_steps);
    table.x_nodes.resize(x_count);
    for (std::size_t j = 0; j < x_count; ++j)
        table.x_nodes[j] = x_max * static_cast<double>(j) / static_cast<double>(x_count - 1);
    table.value.assign(t_steps + 1, std::vector<double>(x_count, 0.0));

    for (std::size_t j = 0; j < x_count; ++j)
        table.value[t_steps][j] = utility.u(table.x_nodes[j]);

    const double delta_max = model.max_claim();
    std::vector<double> theta_grid(theta_count);
    for (std::size_t m = 0; m < theta_count; ++m)
        theta_grid[m] = static_cast<double>(m) / static_cast<double>(theta_count - 1);

    auto interp_next = [&](const std::vector<double>& v, double x) {
        if (x <= table.x_nodes.front()) return v.front();
        const std::size_t n = table.x_nodes.size();
        if (x >= table.x_nodes.back()) {
            const double slope =
                (v[n - 1] - v[n - 2]) / (table.x_nodes[n - 1] - table.x_nodes[n - 2]);
            return v[n - 1] + slope * (x - table.x_nodes[n - 1]);
        }
        const auto it = std::upper_bound(table.x_nodes.begin(), table.x_nodes.end(), x);
        const std::size_t hi = static_cast<std::size_t>(it - table.x_nodes.begin());
        const std::size_t lo = hi - 1;
        const double w = (x - table.x_nodes[lo]) / (table.x_nodes[hi] - table.x_nodes[lo]);
        return (1.0 - w) * v[lo] + w * v[hi];
    };

    for (std::size_t k = t_steps; k-- > 0;) {
        const double t_k = table.times[k];
        const double b_k = feasibility_threshold(model, t_k);
        const std::vector<double>& next = table.value[k + 1];
        for (std::size_t j = 0; j < x_count; ++j) {
            const double x = table.x_nodes[j];
            if (x < b_k) {
                table.value[k][j] = 0.0; // boundary value below the threshold
                continue;
            }
            double cap = 1.0;
            if (delta_max > 0.0) cap = std::min(1.0, (x - b_k) / delta_max);
            cap = std::max(cap, 0.0);

            auto evaluate = [&](double theta) {
                const double xd = x + (model.alpha - model.beta + model.beta * theta) * dt;
                double v = (1.0 - model.intensity * dt) * interp_next(next, xd);
                for (std::size_t i = 0; i < model.claim_count(); ++i) {
                    const double pi_dt = model.claim_intensity(i) * dt;
                    v += pi_dt * interp_next(next, xd - theta * model.claims[i].delta);
                }
                return v;
            };

            double best = -std::numeric_limits<double>::infinity();
            for (double theta : theta_grid) {
                if (theta > cap) break;
                best = std::max(best, evaluate(theta));
            }
            best = std::max(best, evaluate(cap));
            table.value[k][j] = best;
        }
    }
    return table;
}

WeakDualityReport weak_duality_check(const MarketModel& model, const CrraUtility& utility,
                                     const DualField& field, double x0,
                                     std::span<const double> y_probes,
                                     const SimSpec& spec,
                                     std::span<const Strategy> candidates,
                                     std::span<const std::string> candidate_names) {
    WeakDualityReport report;
    report.lower_bound = -std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < candidates.size(); ++c) {
        const SimReport sim = simulate(model, utility, candidates[c], 0.0, x0, spec);
        if (sim.estimate > report.lower_bound) {
            report.lower_bound = sim.estimate;
            report.lower_bound_ci = sim.ci_half_width;
            report.best_strategy =
                c < candidate_names.size() ? candidate_names[c] : "candidate_" + std::to_string(c);
        }
    }

    report.best_upper = std::numeric_limits<double>::infinity();
    report.pass = true;
    const ValueSlice& initial = field.slices.front();
    for (double y : y_probes) {
        const double ub = initial.interpolate(y).value + x0 * y;
        if (ub < report.best_upper) {
            report.best_upper = ub;
            report.best_upper_y = y;
        }
        if (report.lower_bound > ub + 2.0 * report.lower_bound_ci) report.pass = false;
    }
    report.tightest_gap = report.best_upper - report.lower_bound;
    report.gap_fraction =
        report.tightest_gap / std::max(std::abs(report.best_upper), 1e-300);
    return report;
}

} // namespace riskdual

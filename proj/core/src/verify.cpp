#include "riskdual/verify.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <limits>

#include "riskdual/dual_solver.hpp"
#include "riskdual/primal.hpp"

namespace riskdual {

std::vector<double> default_y_probes() {
    // 13 log-spaced points on [0.05, 20].
    std::vector<double> probes(13);
    for (std::size_t i = 0; i < probes.size(); ++i)
        probes[i] = 0.05 * std::pow(400.0, static_cast<double>(i) / 12.0);
    return probes;
}

std::vector<double> biconjugacy_x_probes() {
    // Three decades of wealth.
    std::vector<double> probes(7);
    for (std::size_t i = 0; i < probes.size(); ++i)
        probes[i] = 0.05 * std::pow(1000.0, static_cast<double>(i) / 6.0);
    return probes;
}

FeedbackTable build_feedback_table(const DualField& field, const MarketModel& model,
                                   double x_lo, double x_hi, std::size_t nx,
                                   std::size_t max_rows) {
    FeedbackTable table;
    table.x_nodes.resize(nx);
    for (std::size_t j = 0; j < nx; ++j)
        table.x_nodes[j] =
            x_lo + (x_hi - x_lo) * static_cast<double>(j) / static_cast<double>(nx - 1);

    const std::size_t layers = field.n_layers();
    const std::size_t stride = std::max<std::size_t>(1, (layers - 1) / std::max<std::size_t>(1, max_rows - 1));
    for (std::size_t k = 0; k < layers; k += stride) {
        const double t = field.times[k];
        const double b = feasibility_threshold(model, std::min(t, model.horizon));
        std::vector<double> row(nx, 0.0);
        for (std::size_t j = 0; j < nx; ++j) {
            const double x = table.x_nodes[j];
            if (x >= b) row[j] = candidate_strategy(field, model, t, x).theta_hat;
        }
        table.times.push_back(t);
        table.theta.push_back(std::move(row));
    }
    return table;
}

bool all_pass(const std::vector<CheckRow>& rows) {
    return std::all_of(rows.begin(), rows.end(), [](const CheckRow& r) { return r.pass; });
}

std::vector<CheckRow> run_verification(const ProblemConfig& cfg, const VerifyOptions& opts) {
    const CrraUtility utility = cfg.utility();
    const MarketModel& model = cfg.model;
    const SolveOptions solve_opts{opts.threads};

    DualField field;
    if (!opts.field_csv.empty() && std::filesystem::exists(opts.field_csv))
        field = read_dual_field_csv(opts.field_csv, cfg.grid, utility.gamma());
    else
        field = solve(model, utility, cfg.grid, solve_opts);

    std::vector<CheckRow> rows;
    auto add = [&](const std::string& name, bool pass, double value, double tol) {
        rows.push_back({name, pass, value, tol});
    };

    const FieldAudit audit = audit_field(field, model, utility);
    add("terminal_exactness", audit.terminal_max_abs_error == 0.0,
        audit.terminal_max_abs_error, 0.0);
    add("monotonicity_violations", audit.monotonicity_violations == 0,
        static_cast<double>(audit.monotonicity_violations), 0.0);
    add("convexity_violations", audit.convexity_violations == 0,
        static_cast<double>(audit.convexity_violations), 0.0);
    add("growth_audit", audit.growth_max_ratio <= audit.growth_bound,
        audit.growth_max_ratio, audit.growth_bound);
    add("difference_audit", audit.diff_max_ratio <= audit.diff_bound,
        audit.diff_max_ratio, audit.diff_bound);

    const ResidualReport residual = residual_check(field, model, utility, solve_opts);
    const double tau_res = cfg.grid.tau_res_factor * field.dt();
    add("vi_residual", residual.max_vi_residual <= tau_res, residual.max_vi_residual,
        tau_res);

    long uncovered = 0;
    for (const auto& layer : field.regions)
        for (Region r : layer)
            if (r == Region::None) ++uncovered;
    add("region_coverage", uncovered == 0, static_cast<double>(uncovered), 0.0);

    // Terminal biconjugacy: the Legendre transform of the terminal slice must
    // reproduce U(x) within the log-grid resolution.
    {
        const double h = std::log(cfg.grid.y_max / cfg.grid.y_min) /
                         static_cast<double>(cfg.grid.n_y - 1);
        const double tol = (utility.gamma() + 1.0) * h * h / 4.0 + 1e-12;
        double worst = 0.0;
        for (double x : biconjugacy_x_probes()) {
            const double recovered = legendre(field, model, model.horizon, x).value;
            worst = std::max(worst, std::abs(recovered - utility.u(x)) / utility.u(x));
        }
        add("biconjugacy_terminal", worst <= tol, worst, tol);
    }

    // Constant-distortion feasible bound: v(t,y) <= Utilde(y) + y * c * (T-t)
    // with c the rho = 1 premium rate.
    {
        std::vector<double> ones(model.claim_count(), 1.0);
        const double c1 = premium_rate(model, ones);
        double worst = -std::numeric_limits<double>::infinity();
        double scale = 1.0;
        for (std::size_t k = 0; k < field.n_layers(); ++k) {
            const ValueSlice& s = field.slices[k];
            for (std::size_t j = 0; j < s.size(); ++j) {
                const double y = s.y_nodes()[j];
                const double bound =
                    utility.conjugate(y) + y * c1 * (model.horizon - field.times[k]);
                worst = std::max(worst, s.values()[j] - bound);
                scale = std::max(scale, std::abs(bound));
            }
        }
        const double tol = 1e-9 * scale;
        add("dual_feasible_bound", worst <= tol, worst, tol);
    }

    // Two-oracle agreement at (0, x0).
    const double x0 = cfg.sim_x0;
    {
        const double x_max = x0 + model.alpha * model.horizon + std::max(1.0, x0);
        const DpTable dp = brute_force_primal_dp(model, utility, 64, 512, 101, x_max);
        const double dp_value = dp.at(0.0, x0);
        const double leg_value = legendre(field, model, 0.0, x0).value;
        const double rel = std::abs(leg_value - dp_value) / std::max(std::abs(dp_value), 1e-300);
        add("dp_agreement", rel <= 0.05, rel, 0.05);
    }

    // Weak-duality sandwich with the standard strategy candidates.
    {
        SimSpec spec = cfg.sim;
        spec.seed = cfg.seed;
        spec.threads = opts.threads;
        const double b0 = feasibility_threshold(model, 0.0);
        const FeedbackTable table =
            build_feedback_table(field, model, std::max(b0 + 1e-9, 1e-3),
                                 x0 + model.alpha * model.horizon + 1.0, 33, 9);
        const std::vector<Strategy> candidates = {
            Strategy::zero(), Strategy::constant_theta(0.5), Strategy::full(),
            Strategy::feedback(table)};
        const std::vector<std::string> names = {"zero", "constant_0.5", "full", "feedback"};
        const std::vector<double> probes = default_y_probes();
        const WeakDualityReport wd =
            weak_duality_check(model, utility, field, x0, probes, spec, candidates, names);
        add("weak_duality", wd.pass && wd.gap_fraction < 0.10, wd.gap_fraction, 0.10);
    }

    return rows;
}

} // namespace riskdual

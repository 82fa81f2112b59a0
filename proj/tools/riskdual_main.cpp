// Command-line front end: solve / verify / simulate / transform / report.
//
// Exit codes: 0 success, 2 configuration error, 3 solver failure,
// 4 audit or check failure.

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "riskdual/config.hpp"
#include "riskdual/dual_solver.hpp"
#include "riskdual/io.hpp"
#include "riskdual/primal.hpp"
#include "riskdual/simulator.hpp"
#include "riskdual/verify.hpp"

namespace fs = std::filesystem;
using namespace riskdual;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitSolver = 3;
constexpr int kExitAudit = 4;

struct GlobalArgs {
    std::string config_path;
    std::string out_dir = "out";
    std::uint64_t seed = 0;
    bool seed_set = false;
    unsigned threads = 1; // 0 = auto
};

class Stopwatch {
public:
    Stopwatch() : start_(std::chrono::steady_clock::now()) {}
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_)
            .count();
    }

private:
    std::chrono::steady_clock::time_point start_;
};

ProblemConfig load_config(const GlobalArgs& args) {
    ProblemConfig cfg = parse_config_file(args.config_path);
    if (args.seed_set) cfg.seed = args.seed;
    Validated v = validate(std::move(cfg));
    if (!v.ok()) {
        for (const ConfigIssue& issue : v.issues)
            std::cerr << "config error: " << to_string(issue.code) << ": " << issue.detail
                      << "\n";
        throw ConfigParseError(0, "configuration rejected");
    }
    return *v.config;
}

std::vector<ManifestEntry> base_manifest(const GlobalArgs& args, const std::string& command,
                                         const ProblemConfig& cfg) {
    std::vector<ManifestEntry> m;
    m.push_back({"command", command});
    m.push_back({"config", args.config_path});
    m.push_back({"out_dir", args.out_dir});
    m.push_back({"seed", std::to_string(cfg.seed)});
    m.push_back({"threads", std::to_string(args.threads)});
    m.push_back({"grid.y_min", format_g17(cfg.grid.y_min)});
    m.push_back({"grid.y_max", format_g17(cfg.grid.y_max)});
    m.push_back({"grid.n_y", std::to_string(cfg.grid.n_y)});
    m.push_back({"grid.n_t", std::to_string(cfg.grid.n_t)});
    m.push_back({"grid.cfl_safety", format_g17(cfg.grid.cfl_safety)});
    m.push_back({"grid.rho_floor", format_g17(cfg.grid.rho_floor)});
    m.push_back({"grid.tol_convex", format_g17(cfg.grid.tol_convex)});
    m.push_back({"grid.tau_region_scale", format_g17(cfg.grid.tau_region_scale)});
    m.push_back({"grid.policy_tol", format_g17(cfg.grid.policy_tol)});
    m.push_back({"grid.policy_max_iter", std::to_string(cfg.grid.policy_max_iter)});
    m.push_back({"grid.tau_res_factor", format_g17(cfg.grid.tau_res_factor)});
    m.push_back({"premium_regime", cfg.model.beta > cfg.model.alpha
                                       ? "beta>alpha (positive feasibility threshold)"
                                       : "alpha>=beta (threshold degenerates to 0)"});
    return m;
}

DualField solve_or_load(const ProblemConfig& cfg, const GlobalArgs& args,
                        bool* loaded = nullptr) {
    const fs::path field_path = fs::path(args.out_dir) / "dual_field.csv";
    if (fs::exists(field_path)) {
        if (loaded) *loaded = true;
        return read_dual_field_csv(field_path.string(), cfg.grid, cfg.utility().gamma());
    }
    if (loaded) *loaded = false;
    return solve(cfg.model, cfg.utility(), cfg.grid, SolveOptions{args.threads});
}

int cmd_solve(const GlobalArgs& args) {
    const ProblemConfig cfg = load_config(args);
    fs::create_directories(args.out_dir);

    Stopwatch total;
    Stopwatch solve_clock;
    const DualField field =
        solve(cfg.model, cfg.utility(), cfg.grid, SolveOptions{args.threads});
    const double t_solve = solve_clock.seconds();

    Stopwatch audit_clock;
    const ResidualReport residual =
        residual_check(field, cfg.model, cfg.utility(), SolveOptions{args.threads});
    const FieldAudit audit = audit_field(field, cfg.model, cfg.utility());
    const double t_audit = audit_clock.seconds();

    const fs::path field_path = fs::path(args.out_dir) / "dual_field.csv";
    const fs::path residual_path = fs::path(args.out_dir) / "residuals.csv";
    write_dual_field_csv(field_path.string(), field, cfg.model.claim_count());
    write_residuals_csv(residual_path.string(), field, residual);

    const double tau_res = cfg.grid.tau_res_factor * field.dt();
    const bool ok = audit.pass() && residual.max_vi_residual <= tau_res &&
                    residual.monotonicity_violations == 0 &&
                    residual.convexity_violations == 0;

    auto manifest = base_manifest(args, "solve", cfg);
    manifest.push_back({"tau_res", format_g17(tau_res)});
    manifest.push_back({"max_vi_residual", format_g17(residual.max_vi_residual)});
    manifest.push_back({"floor_sticks", std::to_string(field.floor_sticks)});
    manifest.push_back({"cap_sticks", std::to_string(field.cap_sticks)});
    manifest.push_back({"wall_clock_solve_s", format_g17(t_solve)});
    manifest.push_back({"wall_clock_audit_s", format_g17(t_audit)});
    manifest.push_back({"wall_clock_total_s", format_g17(total.seconds())});
    write_manifest((fs::path(args.out_dir) / "manifest.txt").string(), manifest,
                   {field_path.string(), residual_path.string()});

    std::cout << "solve: " << field.n_layers() << " layers x " << field.n_nodes()
              << " nodes, max VI residual " << residual.max_vi_residual << " (tau "
              << tau_res << "), audits " << (ok ? "PASS" : "FAIL") << "\n";
    return ok ? kExitOk : kExitAudit;
}

int cmd_verify(const GlobalArgs& args) {
    const ProblemConfig cfg = load_config(args);
    fs::create_directories(args.out_dir);

    Stopwatch total;
    VerifyOptions opts;
    opts.threads = args.threads;
    opts.field_csv = (fs::path(args.out_dir) / "dual_field.csv").string();
    const std::vector<CheckRow> rows = run_verification(cfg, opts);

    const fs::path verify_path = fs::path(args.out_dir) / "verify.csv";
    write_verify_csv(verify_path.string(), rows);

    auto manifest = base_manifest(args, "verify", cfg);
    manifest.push_back({"wall_clock_total_s", format_g17(total.seconds())});
    write_manifest((fs::path(args.out_dir) / "manifest.txt").string(), manifest,
                   {verify_path.string()});

    for (const CheckRow& r : rows)
        std::cout << r.check << ": " << (r.pass ? "PASS" : "FAIL") << " (value "
                  << r.value << ", tolerance " << r.tolerance << ")\n";
    return all_pass(rows) ? kExitOk : kExitAudit;
}

Strategy parse_strategy(const std::string& selector) {
    if (selector == "zero") return Strategy::zero();
    if (selector == "full") return Strategy::full();
    if (selector.rfind("constant:", 0) == 0) {
        const double c = std::stod(selector.substr(9));
        if (c < 0.0 || c > 1.0)
            throw ConfigParseError(0, "constant strategy outside [0, 1]");
        return Strategy::constant_theta(c);
    }
    if (selector.rfind("table:", 0) == 0) {
        const std::string path = selector.substr(6);
        return Strategy::feedback(feedback_table_from_primal(read_primal_csv(path)));
    }
    throw ConfigParseError(0, "unknown strategy selector '" + selector + "'");
}

int cmd_simulate(const GlobalArgs& args, const std::string& selector, bool traces) {
    const ProblemConfig cfg = load_config(args);
    const Strategy strategy = parse_strategy(selector);
    fs::create_directories(args.out_dir);

    SimSpec spec = cfg.sim;
    spec.seed = cfg.seed;
    spec.threads = args.threads;

    Stopwatch total;
    std::vector<TraceEvent> trace;
    SimReport report;
    try {
        report = simulate(cfg.model, cfg.utility(), strategy, cfg.sim_t0, cfg.sim_x0, spec,
                          traces ? &trace : nullptr);
    } catch (const InfeasibleStart& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    }

    const fs::path report_path = fs::path(args.out_dir) / "sim_report.csv";
    write_sim_report_csv(report_path.string(), report);
    std::vector<std::string> outputs = {report_path.string()};
    if (traces) {
        const fs::path trace_path = fs::path(args.out_dir) / "trace.csv";
        write_trace_csv(trace_path.string(), trace);
        outputs.push_back(trace_path.string());
    }

    auto manifest = base_manifest(args, "simulate", cfg);
    manifest.push_back({"strategy", selector});
    manifest.push_back({"n_paths", std::to_string(spec.n_paths)});
    manifest.push_back({"wall_clock_total_s", format_g17(total.seconds())});
    write_manifest((fs::path(args.out_dir) / "manifest.txt").string(), manifest, outputs);

    std::cout << "estimate " << format_g17(report.estimate) << " +/- "
              << format_g17(report.ci_half_width) << " (ruin " << report.ruin_count << "/"
              << report.paths_used << ")\n";
    return kExitOk;
}

int cmd_transform(const GlobalArgs& args, double t, double x_min, double x_max,
                  std::size_t n_x) {
    const ProblemConfig cfg = load_config(args);
    fs::create_directories(args.out_dir);

    Stopwatch total;
    const DualField field = solve_or_load(cfg, args);

    const double b = feasibility_threshold(cfg.model, std::min(t, cfg.model.horizon));
    if (x_min <= 0.0) x_min = std::max(b + 1e-9, 1e-2);
    if (x_max <= 0.0) x_max = cfg.sim_x0 + cfg.model.alpha * cfg.model.horizon + 1.0;
    if (x_min < b) x_min = b;
    if (!(x_max > x_min))
        throw ConfigParseError(0, "transform: empty wealth range");

    std::vector<double> xs(n_x);
    for (std::size_t j = 0; j < n_x; ++j)
        xs[j] = x_min + (x_max - x_min) * static_cast<double>(j) /
                            static_cast<double>(n_x - 1);
    const PrimalSlice slice = transform_slice(field, cfg.model, t, xs);

    const fs::path primal_path = fs::path(args.out_dir) / "primal_slice.csv";
    write_primal_csv(primal_path.string(), {slice});

    auto manifest = base_manifest(args, "transform", cfg);
    manifest.push_back({"t", format_g17(t)});
    manifest.push_back({"wall_clock_total_s", format_g17(total.seconds())});
    write_manifest((fs::path(args.out_dir) / "manifest.txt").string(), manifest,
                   {primal_path.string()});

    std::cout << "transform: " << n_x << " wealth nodes at t=" << t << " -> "
              << primal_path.string() << "\n";
    return kExitOk;
}

int cmd_report(const GlobalArgs& args) {
    const ProblemConfig cfg = load_config(args);
    fs::create_directories(args.out_dir);

    Stopwatch total;
    const DualField field = solve_or_load(cfg, args);

    const fs::path report_path = fs::path(args.out_dir) / "report.txt";
    {
        std::ofstream out(report_path.string(), std::ios::binary);
        out << "premium regime: "
            << (cfg.model.beta > cfg.model.alpha ? "beta>alpha" : "alpha>=beta") << "\n";
        out << "feasibility threshold b(0) = "
            << format_g17(feasibility_threshold(cfg.model, 0.0)) << "\n";
        out << "control floor sticks: " << field.floor_sticks
            << ", cap sticks: " << field.cap_sticks << "\n\n";

        out << "region map (nodes per layer)\n";
        out << "t,R1_only,R2_only,both,none\n";
        for (std::size_t k = 0; k < field.n_layers(); ++k) {
            long r1 = 0, r2 = 0, both = 0, none = 0;
            for (Region r : field.regions[k]) {
                switch (r) {
                    case Region::R1: ++r1; break;
                    case Region::R2: ++r2; break;
                    case Region::Both: ++both; break;
                    case Region::None: ++none; break;
                }
            }
            out << format_g17(field.times[k]) << ',' << r1 << ',' << r2 << ',' << both
                << ',' << none << "\n";
        }

        out << "\nstrategy field at t=0\n";
        out << "x,theta_hat,consistency,flag\n";
        const double b0 = feasibility_threshold(cfg.model, 0.0);
        const double x_hi = cfg.sim_x0 + cfg.model.alpha * cfg.model.horizon + 1.0;
        for (std::size_t j = 0; j < 17; ++j) {
            const double x =
                std::max(b0 + 1e-9, 1e-2) +
                (x_hi - std::max(b0 + 1e-9, 1e-2)) * static_cast<double>(j) / 16.0;
            const StrategyEstimate est = candidate_strategy(field, cfg.model, 0.0, x);
            out << format_g17(x) << ',' << format_g17(est.theta_hat) << ','
                << format_g17(est.consistency) << ','
                << (est.consistency > 0.1 ? "UNRELIABLE" : "ok") << "\n";
        }
    }

    auto manifest = base_manifest(args, "report", cfg);
    manifest.push_back({"wall_clock_total_s", format_g17(total.seconds())});
    write_manifest((fs::path(args.out_dir) / "manifest.txt").string(), manifest,
                   {report_path.string()});

    std::cout << "report -> " << report_path.string() << "\n";
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Dual HJB variational-inequality solver for proportional insurance"};
    app.require_subcommand(1);
    app.fallthrough();

    GlobalArgs args;
    app.add_option("--config", args.config_path, "key=value problem configuration")
        ->required();
    app.add_option("--out", args.out_dir, "output directory");
    auto* seed_opt = app.add_option("--seed", args.seed, "override the config seed");
    app.add_option("--threads", args.threads, "worker threads (0 = auto)");

    CLI::App* solve_cmd = app.add_subcommand("solve", "solve the dual field and audit it");
    CLI::App* verify_cmd =
        app.add_subcommand("verify", "run the consolidated invariant/oracle checks");

    std::string strategy_selector = "full";
    bool traces = false;
    CLI::App* simulate_cmd = app.add_subcommand("simulate", "Monte Carlo wealth simulation");
    simulate_cmd->add_option("--strategy", strategy_selector,
                             "zero | full | constant:<v> | table:<primal_slice.csv>");
    simulate_cmd->add_flag("--traces", traces, "export the first 100 paths");

    double transform_t = 0.0, transform_x_min = -1.0, transform_x_max = -1.0;
    std::size_t transform_n_x = 65;
    CLI::App* transform_cmd =
        app.add_subcommand("transform", "Legendre export over a wealth grid");
    transform_cmd->add_option("--t", transform_t, "time of the primal slice");
    transform_cmd->add_option("--x-min", transform_x_min, "wealth grid start");
    transform_cmd->add_option("--x-max", transform_x_max, "wealth grid end");
    transform_cmd->add_option("--n-x", transform_n_x, "wealth node count");

    CLI::App* report_cmd =
        app.add_subcommand("report", "region-map and strategy-field summary");

    CLI11_PARSE(app, argc, argv);
    args.seed_set = seed_opt->count() > 0;

    try {
        if (solve_cmd->parsed()) return cmd_solve(args);
        if (verify_cmd->parsed()) return cmd_verify(args);
        if (simulate_cmd->parsed()) return cmd_simulate(args, strategy_selector, traces);
        if (transform_cmd->parsed())
            return cmd_transform(args, transform_t, transform_x_min, transform_x_max,
                                 transform_n_x);
        if (report_cmd->parsed()) return cmd_report(args);
    } catch (const ConfigParseError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const InfeasibleStart& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const InfeasibleWealth& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const CflViolation& e) {
        std::cerr << "solver error: " << e.what() << "\n";
        return kExitSolver;
    } catch (const NonconvergedPolicyIteration& e) {
        std::cerr << "solver error: " << e.what() << "\n";
        return kExitSolver;
    } catch (const NonfiniteValue& e) {
        std::cerr << "solver error: " << e.what() << "\n";
        return kExitSolver;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitSolver;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitSolver;
    }
    return kExitOk;
}

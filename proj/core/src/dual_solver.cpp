#include "riskdual/dual_solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "riskdual/parallel.hpp"

namespace riskdual {

namespace {

constexpr std::size_t kMaxSubstepDoublings = 6; // at most 2^6 internal halvings

// Everything the linear step needs from one node's Hamiltonian minimization.
struct NodePolicy {
    double prem = 0.0;       // y_j * premium_rate(rho)
    double srho = 0.0;       // sum_i pi_i (rho_i - 1)
    double interp_sum = 0.0; // sum_i pi_i * v(rho_i y_j) on the iterate
    bool floor_hit = false;
    bool cap_hit = false;
    std::vector<double> rho;
};

void check_grid(const GridSpec& g) {
    const bool ok = g.y_min > 0.0 && g.y_min < 1.0 && g.y_max > 1.0 &&
                    g.n_y >= 16 && g.n_t >= 4 && g.cfl_safety > 0.0 &&
                    g.cfl_safety <= 1.0 && g.rho_floor > 0.0;
    if (!ok) throw Error("solve: grid spec violates its invariants");
}

double stability_bound(const MarketModel& model, const CrraUtility& utility,
                       const GridSpec& grid, const std::vector<double>& y) {
    // Lipschitz-type constant of the discrete Hamiltonian: the nonlocal part
    // scales with the intensity and the distortion cap, the transport part
    // with alpha times the worst local y/h ratio of the log grid.
    double max_y_over_h = 0.0;
    for (std::size_t j = 0; j < y.size(); ++j) {
        double h = std::numeric_limits<double>::infinity();
        if (j > 0) h = std::min(h, y[j] - y[j - 1]);
        if (j + 1 < y.size()) h = std::min(h, y[j + 1] - y[j]);
        max_y_over_h = std::max(max_y_over_h, y[j] / h);
    }
    const double cap = std::max(rho_bar(model), 10.0);
    const double lipschitz = 2.0 * model.intensity * (1.0 + std::pow(cap, utility.gamma())) +
                             model.alpha * max_y_over_h;
    return grid.cfl_safety / std::max(lipschitz, 1e-300);
}

void thomas_solve(std::vector<double>& sub, std::vector<double>& diag,
                  std::vector<double>& super, std::vector<double>& rhs,
                  std::vector<double>& x) {
    const std::size_t n = diag.size();
    for (std::size_t j = 1; j < n; ++j) {
        const double m = sub[j] / diag[j - 1];
        diag[j] -= m * super[j - 1];
        rhs[j] -= m * rhs[j - 1];
    }
    x[n - 1] = rhs[n - 1] / diag[n - 1];
    for (std::size_t j = n - 1; j-- > 0;)
        x[j] = (rhs[j] - super[j] * x[j + 1]) / diag[j];
}

DualField solve_impl(const MarketModel& model, const CrraUtility& utility,
                     const GridSpec& grid, std::span<const double> terminal,
                     const SolveOptions& opts) {
    check_grid(grid);
    const double T = model.horizon;
    const double gamma = utility.gamma();
    const std::vector<double> y = grid.make_y_nodes();
    const std::size_t n = y.size();
    const std::size_t d = model.claim_count();
    if (terminal.size() != n)
        throw Error("solve: terminal data size does not match the grid");

    DualField field;
    field.grid = grid;
    field.gamma = gamma;
    field.times = grid.make_times(T);
    const std::size_t n_t = grid.n_t;
    field.slices.resize(n_t + 1);
    field.controls.assign(n_t + 1, std::vector<std::vector<double>>(n));
    field.proj_active.assign(n_t + 1, std::vector<unsigned char>(n, 0));

    field.slices[n_t] =
        ValueSlice(y, std::vector<double>(terminal.begin(), terminal.end()), T, gamma);

    std::vector<ControlBox> boxes(n);
    for (std::size_t j = 0; j < n; ++j)
        boxes[j] = node_control_box(model, y[j], grid.y_max, grid.rho_floor);

    std::vector<NodePolicy> policies(n);
    auto minimize_layer = [&](const ValueSlice& slice) {
        parallel_for(n, opts.threads, [&](std::size_t j) {
            HamiltonianResult res = minimize_hamiltonian(slice, j, model, boxes[j]);
            NodePolicy np;
            np.prem = y[j] * premium_rate(model, res.minimizer);
            np.floor_hit = res.floor_hit;
            np.cap_hit = res.cap_hit;
            for (std::size_t i = 0; i < d; ++i) {
                const double pi_i = model.claim_intensity(i);
                np.srho += pi_i * (res.minimizer[i] - 1.0);
                np.interp_sum += pi_i * slice.interpolate(res.minimizer[i] * y[j]).value;
            }
            np.rho = std::move(res.minimizer);
            policies[j] = std::move(np);
        });
    };

    // Controls on the terminal layer, for completeness of the exported field.
    minimize_layer(field.slices[n_t]);
    for (std::size_t j = 0; j < n; ++j) field.controls[n_t][j] = policies[j].rho;

    // Time stepping with automatic sub-step halving.
    const double dt_macro = T / static_cast<double>(n_t);
    const double dt_stable = stability_bound(model, utility, grid, y);
    std::size_t substeps = 1;
    for (std::size_t k = 0; k < kMaxSubstepDoublings && dt_macro / substeps > dt_stable; ++k)
        substeps *= 2;
    if (dt_macro / static_cast<double>(substeps) > dt_stable)
        throw CflViolation(dt_macro / static_cast<double>(substeps), dt_stable);
    const double dt_sub = dt_macro / static_cast<double>(substeps);
    const double inv_dt = 1.0 / dt_sub;

    std::vector<double> sub(n), diag(n), super(n), rhs(n), x(n);

    for (std::size_t k = n_t; k-- > 0;) {
        std::vector<double> w = field.slices[k + 1].values();
        std::vector<unsigned char> proj(n, 0);

        for (std::size_t step = 0; step < substeps; ++step) {
            const std::vector<double> w0 = w;
            ValueSlice iterate(y, w, field.times[k], gamma);

            bool converged = false;
            for (std::size_t it = 0; it < grid.policy_max_iter; ++it) {
                minimize_layer(iterate);

                // Linearly implicit step: local value and upwinded transport
                // on the left-hand side, nonlocal samples lagged one sweep.
                for (std::size_t j = 0; j < n; ++j) {
                    sub[j] = super[j] = 0.0;
                    diag[j] = inv_dt + model.intensity;
                    rhs[j] = w0[j] * inv_dt + policies[j].interp_sum + policies[j].prem;
                    const double s = policies[j].srho * y[j];
                    if (s == 0.0) continue;
                    if (s > 0.0 && j > 0) {
                        const double h = y[j] - y[j - 1];
                        diag[j] += s / h;
                        sub[j] -= s / h;
                    } else if (s < 0.0 && j + 1 < n) {
                        const double h = y[j + 1] - y[j];
                        diag[j] -= s / h;
                        super[j] += s / h;
                    } else {
                        // Upwind direction points off the grid; only the
                        // inward difference exists. Keep it implicit while
                        // the diagonal stays safely positive, else lag it.
                        if (j == 0) {
                            const double h = y[1] - y[0];
                            if (diag[j] - s / h > 0.5 * inv_dt) {
                                diag[j] -= s / h;
                                super[j] += s / h;
                            } else {
                                rhs[j] -= s * iterate.derivative_at(j);
                            }
                        } else {
                            const double h = y[n - 1] - y[n - 2];
                            if (diag[j] + s / h > 0.5 * inv_dt) {
                                diag[j] += s / h;
                                sub[j] -= s / h;
                            } else {
                                rhs[j] -= s * iterate.derivative_at(j);
                            }
                        }
                    }
                }
                thomas_solve(sub, diag, super, rhs, x);

                double diff = 0.0, scale = 1.0;
                for (std::size_t j = 0; j < n; ++j) {
                    diff = std::max(diff, std::abs(x[j] - w[j]));
                    scale = std::max(scale, 1.0 + std::abs(x[j]));
                }
                w = x;
                iterate = ValueSlice(y, w, field.times[k], gamma);
                if (diff <= grid.policy_tol * scale) {
                    converged = true;
                    break;
                }
            }
            if (!converged)
                throw NonconvergedPolicyIteration(
                    "policy iteration did not reach tolerance at layer " + std::to_string(k));

            // Obstacle: largest nonincreasing minorant (running minimum).
            for (std::size_t j = 1; j < n; ++j) {
                if (w[j] > w[j - 1]) {
                    w[j] = w[j - 1];
                    proj[j] = 1;
                }
            }
        }

        for (double v : w)
            if (!std::isfinite(v))
                throw NonfiniteValue("solve: non-finite value at layer " + std::to_string(k));

        field.slices[k] = ValueSlice(y, w, field.times[k], gamma);
        field.proj_active[k] = proj;
        for (std::size_t j = 0; j < n; ++j) {
            field.controls[k][j] = policies[j].rho;
            if (policies[j].floor_hit) ++field.floor_sticks;
            if (policies[j].cap_hit) ++field.cap_sticks;
        }
    }

    field.regions = region_map(field, model, opts);
    return field;
}

} // namespace

std::size_t DualField::nearest_layer(double t, double* offset) const {
    std::size_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < times.size(); ++k) {
        const double dist = std::abs(times[k] - t);
        if (dist < best_d) {
            best_d = dist;
            best = k;
        }
    }
    if (offset) *offset = times[best] - t;
    return best;
}

DualField solve(const MarketModel& model, const CrraUtility& utility,
                const GridSpec& grid, const SolveOptions& opts) {
    const std::vector<double> y = grid.make_y_nodes();
    std::vector<double> terminal(y.size());
    for (std::size_t j = 0; j < y.size(); ++j) terminal[j] = utility.conjugate(y[j]);
    return solve_impl(model, utility, grid, terminal, opts);
}

DualField solve_with_terminal(const MarketModel& model, const CrraUtility& utility,
                              const GridSpec& grid,
                              std::span<const double> terminal_values,
                              const SolveOptions& opts) {
    return solve_impl(model, utility, grid, terminal_values, opts);
}

ValueSlice enforce_monotone(const ValueSlice& slice) {
    std::vector<double> v = slice.values();
    for (std::size_t j = 1; j < v.size(); ++j) v[j] = std::min(v[j], v[j - 1]);
    return ValueSlice(slice.y_nodes(), std::move(v), slice.time_label(), slice.gamma());
}

std::vector<std::vector<Region>> region_map(const DualField& field,
                                            const MarketModel& model,
                                            const SolveOptions& opts) {
    const std::size_t layers = field.n_layers();
    const std::size_t n = field.n_nodes();
    std::vector<std::vector<Region>> regions(layers, std::vector<Region>(n, Region::None));
    if (layers == 0) return regions;

    const double dt = field.dt();
    const double tau_res = field.grid.tau_res_factor * dt;
    std::vector<ControlBox> boxes(n);
    for (std::size_t j = 0; j < n; ++j)
        boxes[j] = node_control_box(model, field.slices[0].y_nodes()[j], field.grid.y_max,
                                    field.grid.rho_floor);

    std::vector<double> h_layer(n);
    for (std::size_t k = 0; k + 1 < layers; ++k) {
        const ValueSlice& s_k = field.slices[k];
        parallel_for(n, opts.threads, [&](std::size_t j) {
            h_layer[j] = minimize_hamiltonian(s_k, j, model, boxes[j]).value;
        });
        for (std::size_t j = 0; j < n; ++j) {
            const double a =
                (field.slices[k + 1].values()[j] - s_k.values()[j]) / dt + h_layer[j];
            const double b = -s_k.derivative_at(j);
            const double scale = std::max(1.0, std::abs(s_k.values()[j]));
            unsigned char flags = 0;
            if (std::abs(a) <= tau_res) flags |= 1;
            if (field.proj_active[k][j] || std::abs(b) <= field.grid.tau_region_scale * scale)
                flags |= 2;
            regions[k][j] = static_cast<Region>(flags);
        }
    }
    // Terminal layer: the terminal identity plays the PDE role; flag the
    // obstacle wherever the data is locally flat.
    const ValueSlice& last = field.slices[layers - 1];
    for (std::size_t j = 0; j < n; ++j) {
        unsigned char flags = 1;
        const double scale = std::max(1.0, std::abs(last.values()[j]));
        if (std::abs(last.derivative_at(j)) <= field.grid.tau_region_scale * scale) flags |= 2;
        regions[layers - 1][j] = static_cast<Region>(flags);
    }
    return regions;
}

ResidualReport residual_check(const DualField& field, const MarketModel& model,
                              const CrraUtility& utility, const SolveOptions& opts) {
    (void)utility;
    ResidualReport report;
    const std::size_t layers = field.n_layers();
    const std::size_t n = field.n_nodes();
    if (layers < 2) return report;

    const double dt = field.dt();
    const std::vector<double>& y = field.slices[0].y_nodes();
    std::vector<ControlBox> boxes(n);
    for (std::size_t j = 0; j < n; ++j)
        boxes[j] = node_control_box(model, y[j], field.grid.y_max, field.grid.rho_floor);

    std::vector<double> h_layer(n);
    report.node_residuals.assign(layers - 1, std::vector<double>(n, 0.0));
    for (std::size_t k = 0; k + 1 < layers; ++k) {
        const ValueSlice& s_k = field.slices[k];
        parallel_for(n, opts.threads, [&](std::size_t j) {
            h_layer[j] = minimize_hamiltonian(s_k, j, model, boxes[j]).value;
        });
        for (std::size_t j = 0; j < n; ++j) {
            const double a =
                (field.slices[k + 1].values()[j] - s_k.values()[j]) / dt + h_layer[j];
            const double b = -s_k.derivative_at(j);
            const double res = std::abs(std::min(a, b));
            report.node_residuals[k][j] = res;
            if (res > report.max_vi_residual) {
                report.max_vi_residual = res;
                report.worst_time = k;
                report.worst_node = j;
            }
        }
    }

    for (std::size_t k = 0; k < layers; ++k) {
        const std::vector<double>& v = field.slices[k].values();
        for (std::size_t j = 1; j < n; ++j)
            if (v[j] > v[j - 1]) ++report.monotonicity_violations;
        for (std::size_t j = 1; j + 1 < n; ++j) {
            const double sl = (v[j] - v[j - 1]) / (y[j] - y[j - 1]);
            const double sr = (v[j + 1] - v[j]) / (y[j + 1] - y[j]);
            if (sr - sl < -field.grid.tol_convex) ++report.convexity_violations;
        }
    }
    return report;
}

FieldAudit audit_field(const DualField& field, const MarketModel& model,
                       const CrraUtility& utility) {
    FieldAudit audit;
    const std::size_t layers = field.n_layers();
    if (layers == 0) return audit;
    const std::size_t n = field.n_nodes();
    const std::vector<double>& y = field.slices[0].y_nodes();
    const double gamma = utility.gamma();
    const double T = model.horizon;

    // A-priori envelopes of the class bounds: the dual value is squeezed
    // between the rho = 1 feasible-point bound above and a premium-cost bound
    // below, both within these constants with headroom.
    audit.growth_bound = 2.0 * (1.0 / gamma + (model.alpha + model.beta + 1.0) * T);
    audit.diff_bound = 2.0 * (1.0 + (model.alpha + model.beta + 1.0) * T);

    const ValueSlice& term = field.slices[layers - 1];
    for (std::size_t j = 0; j < n; ++j)
        audit.terminal_max_abs_error = std::max(
            audit.terminal_max_abs_error,
            std::abs(term.values()[j] - utility.conjugate(y[j])));

    for (std::size_t k = 0; k < layers; ++k) {
        const std::vector<double>& v = field.slices[k].values();
        for (std::size_t j = 0; j < n; ++j) {
            const double w = y[j] + std::pow(y[j], -gamma);
            audit.growth_max_ratio = std::max(audit.growth_max_ratio, std::abs(v[j]) / w);
        }
        for (std::size_t j = 1; j < n; ++j) {
            if (v[j] > v[j - 1]) ++audit.monotonicity_violations;
            const double wq = 1.0 + std::pow(y[j - 1], -(gamma + 1.0)) +
                              std::pow(y[j], -(gamma + 1.0));
            const double ratio = std::abs(v[j] - v[j - 1]) / ((y[j] - y[j - 1]) * wq);
            audit.diff_max_ratio = std::max(audit.diff_max_ratio, ratio);
        }
        for (std::size_t j = 1; j + 1 < n; ++j) {
            const double sl = (v[j] - v[j - 1]) / (y[j] - y[j - 1]);
            const double sr = (v[j + 1] - v[j]) / (y[j + 1] - y[j]);
            if (sr - sl < -field.grid.tol_convex) ++audit.convexity_violations;
        }
    }
    return audit;
}

} // namespace riskdual

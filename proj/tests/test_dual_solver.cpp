#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "riskdual/dual_solver.hpp"

using namespace riskdual;

namespace {

MarketModel no_claims_model() {
    MarketModel m;
    m.alpha = 0.3;
    m.beta = 0.1;
    m.intensity = 0.0;
    m.horizon = 1.0;
    return m;
}

MarketModel one_claim_model() {
    MarketModel m;
    m.alpha = 0.4;
    m.beta = 0.3;
    m.intensity = 1.0;
    m.claims = {{1.0, 1.0}};
    m.horizon = 1.0;
    return m;
}

GridSpec small_grid() {
    GridSpec g;
    g.n_y = 128;
    g.n_t = 64;
    return g;
}

std::size_t nearest_index(const std::vector<double>& y, double target) {
    std::size_t best = 0;
    for (std::size_t j = 1; j < y.size(); ++j)
        if (std::abs(y[j] - target) < std::abs(y[best] - target)) best = j;
    return best;
}

} // namespace

TEST_CASE("enforce_monotone is the running minimum") {
    const std::vector<double> y = {1.0, 2.0, 3.0};
    CHECK(enforce_monotone(ValueSlice(y, {3.0, 1.0, 2.0}, 0.0, 1.0)).values() ==
          std::vector<double>{3.0, 1.0, 1.0});
    CHECK(enforce_monotone(ValueSlice(y, {5.0, 4.0, 4.0}, 0.0, 1.0)).values() ==
          std::vector<double>{5.0, 4.0, 4.0});
    const std::vector<double> y5 = {1.0, 2.0, 3.0, 4.0, 5.0};
    CHECK(enforce_monotone(ValueSlice(y5, {5.0, 4.0, 4.0, 6.0, 3.0}, 0.0, 1.0)).values() ==
          std::vector<double>{5.0, 4.0, 4.0, 4.0, 3.0});
}

TEST_CASE("terminal slice equals the conjugate utility exactly") {
    const CrraUtility u(0.5);
    const DualField f = solve(no_claims_model(), u, small_grid());
    const ValueSlice& term = f.slices.back();
    for (std::size_t j = 0; j < term.size(); ++j)
        CHECK(term.values()[j] == u.conjugate(term.y_nodes()[j]));
}

TEST_CASE("claim-free instance reproduces the deterministic-control closed form") {
    const CrraUtility u(0.5);
    const MarketModel m = no_claims_model();

    // Validate the constant-control reduction itself by dense grid search
    // before trusting it.
    for (double y : {0.1, 1.0, 10.0}) {
        const double reduced = oracles::claim_free_dual_closed_form(y, m.alpha, 0.0, 1.0);
        const double searched = oracles::claim_free_dual_grid_search(y, m.alpha, 0.0, 1.0, 1.0);
        CHECK(reduced == doctest::Approx(searched).epsilon(1e-7));
    }

    GridSpec g; // default 256 x 256
    const DualField f = solve(m, u, g);
    for (double y : {0.1, 0.5, 1.0, 2.0, 5.0, 10.0}) {
        const double got = f.slices[0].interpolate(y).value;
        const double expected = oracles::claim_free_dual_closed_form(y, m.alpha, 0.0, 1.0);
        CHECK(std::abs(got - expected) / expected <= 0.01);
    }
    // Interior layer too, not just t = 0.
    const std::size_t mid = g.n_t / 2;
    for (double y : {0.2, 2.0, 20.0}) {
        const double got = f.slices[mid].interpolate(y).value;
        const double expected =
            oracles::claim_free_dual_closed_form(y, m.alpha, f.times[mid], 1.0);
        CHECK(std::abs(got - expected) / expected <= 0.01);
    }
}

TEST_CASE("unit-distortion feasible bound caps the solved field") {
    const CrraUtility u(0.5);
    for (const MarketModel& m : {one_claim_model(), no_claims_model()}) {
        const DualField f = solve(m, u, small_grid());
        const double s = m.mean_claim_rate();
        const double c1 = m.alpha - m.beta + std::max(0.0, m.beta - s);
        for (std::size_t k = 0; k < f.n_layers(); ++k) {
            const ValueSlice& slice = f.slices[k];
            for (std::size_t j = 0; j < slice.size(); ++j) {
                const double y = slice.y_nodes()[j];
                const double bound =
                    u.conjugate(y) + y * c1 * (m.horizon - f.times[k]);
                CHECK(slice.values()[j] <= bound + 1e-9 * (1.0 + std::abs(bound)));
            }
        }
    }
}

TEST_CASE("insurance-free bound: beta = 0 keeps the field under the drift cap") {
    const CrraUtility u(0.5);
    MarketModel m = one_claim_model();
    m.beta = 0.0;
    const DualField f = solve(m, u, small_grid());
    for (std::size_t k = 0; k < f.n_layers(); ++k) {
        const ValueSlice& slice = f.slices[k];
        for (std::size_t j = 0; j < slice.size(); ++j) {
            const double y = slice.y_nodes()[j];
            const double bound = u.conjugate(y) + y * m.alpha * (m.horizon - f.times[k]);
            CHECK(slice.values()[j] <= bound + 1e-9 * (1.0 + bound));
        }
    }
}

TEST_CASE("monotone scheme: lifting the terminal data never lowers earlier layers") {
    const CrraUtility u(0.5);
    const MarketModel m = one_claim_model();
    const GridSpec g = small_grid();
    const std::vector<double> y = g.make_y_nodes();
    std::vector<double> term(y.size()), lifted(y.size());
    for (std::size_t j = 0; j < y.size(); ++j) {
        term[j] = u.conjugate(y[j]);
        lifted[j] = term[j] + 0.1;
    }
    const DualField f_lo = solve_with_terminal(m, u, g, term);
    const DualField f_hi = solve_with_terminal(m, u, g, lifted);
    for (std::size_t k = 0; k < f_lo.n_layers(); ++k)
        for (std::size_t j = 0; j < y.size(); ++j)
            CHECK(f_hi.slices[k].values()[j] >= f_lo.slices[k].values()[j] - 1e-12);
}

TEST_CASE("comparison shadow: ordered terminal data stays ordered") {
    const CrraUtility u(0.5);

    // Claim-free: the Hamiltonian is slice-independent, so arbitrary ordered
    // perturbations propagate monotonically.
    {
        const MarketModel m = no_claims_model();
        const GridSpec g = small_grid();
        const std::vector<double> y = g.make_y_nodes();
        std::vector<double> f_data(y.size()), g_data(y.size());
        for (std::size_t j = 0; j < y.size(); ++j) {
            f_data[j] = u.conjugate(y[j]);
            g_data[j] = f_data[j] * 1.1 + 0.05 * std::exp(-y[j]);
        }
        const DualField lo = solve_with_terminal(m, u, g, f_data);
        const DualField hi = solve_with_terminal(m, u, g, g_data);
        for (std::size_t k = 0; k < lo.n_layers(); ++k)
            for (std::size_t j = 0; j < y.size(); ++j)
                CHECK(lo.slices[k].values()[j] <= hi.slices[k].values()[j] + 1e-12);
    }

    // With claims: affine separation, which the nonlocal operator ignores.
    {
        const MarketModel m = one_claim_model();
        const GridSpec g = small_grid();
        const std::vector<double> y = g.make_y_nodes();
        std::vector<double> f_data(y.size()), g_data(y.size());
        for (std::size_t j = 0; j < y.size(); ++j) {
            f_data[j] = u.conjugate(y[j]);
            g_data[j] = f_data[j] + 0.2 + 0.01 * y[j];
        }
        const DualField lo = solve_with_terminal(m, u, g, f_data);
        const DualField hi = solve_with_terminal(m, u, g, g_data);
        for (std::size_t k = 0; k < lo.n_layers(); ++k)
            for (std::size_t j = 0; j < y.size(); ++j)
                CHECK(lo.slices[k].values()[j] <= hi.slices[k].values()[j] + 1e-12);
    }
}

TEST_CASE("residual check accepts healthy solves and localizes injected faults") {
    const CrraUtility u(0.5);
    const MarketModel m = one_claim_model();
    const GridSpec g = small_grid();
    DualField f = solve(m, u, g);

    const ResidualReport clean = residual_check(f, m, u);
    CHECK(clean.max_vi_residual <= g.tau_res_factor * f.dt());
    CHECK(clean.monotonicity_violations == 0);
    CHECK(clean.convexity_violations == 0);

    // Corrupt one node by +1 and expect the residual to spike there.
    const std::size_t bad_k = g.n_t / 2, bad_j = 40;
    f.slices[bad_k].mutable_values()[bad_j] += 1.0;
    f.slices[bad_k].refit_tails();
    const ResidualReport dirty = residual_check(f, m, u);
    CHECK(dirty.max_vi_residual > 10.0);
    CHECK(dirty.worst_time == bad_k);
    CHECK(dirty.worst_node == bad_j);
    CHECK(dirty.monotonicity_violations > 0);
}

TEST_CASE("residual report is empty for a terminal-only field") {
    const CrraUtility u(0.5);
    const MarketModel m = one_claim_model();
    GridSpec g = small_grid();
    DualField f = solve(m, u, g);
    DualField stub;
    stub.grid = g;
    stub.gamma = u.gamma();
    stub.times = {m.horizon};
    stub.slices = {f.slices.back()};
    const ResidualReport r = residual_check(stub, m, u);
    CHECK(r.max_vi_residual == 0.0);
    CHECK(r.node_residuals.empty());
}

TEST_CASE("region map: jump region at large y, PDE region at small y") {
    const CrraUtility u(0.5);
    const MarketModel m = no_claims_model();
    GridSpec g; // default
    const DualField f = solve(m, u, g);
    const std::vector<double>& y = f.slices[0].y_nodes();

    // Closed form at t = 0: the obstacle binds above y_c = 1/sqrt(alpha T).
    const double y_c = 1.0 / std::sqrt(m.alpha * m.horizon);
    CHECK(has_r2(f.regions[0][nearest_index(y, 4.0 * y_c)]));
    CHECK(has_r2(f.regions[0][nearest_index(y, 40.0 * y_c)]));
    CHECK(has_r1(f.regions[0][nearest_index(y, y_c / 10.0)]));
    CHECK_FALSE(has_r2(f.regions[0][nearest_index(y, y_c / 10.0)]));

    // Terminal-adjacent layer: the same y = 4 y_c node is still PDE-active
    // because the contact point starts far right and sweeps left.
    const std::size_t kt = g.n_t - 1;
    CHECK(has_r1(f.regions[kt][nearest_index(y, 4.0 * y_c)]));

    // Every node carries at least one flag on an accepted solve.
    long uncovered = 0;
    for (const auto& layer : f.regions)
        for (Region r : layer)
            if (r == Region::None) ++uncovered;
    CHECK(uncovered == 0);
}

TEST_CASE("field audit passes on accepted solves") {
    const CrraUtility u(0.5);
    for (const MarketModel& m : {no_claims_model(), one_claim_model()}) {
        const DualField f = solve(m, u, small_grid());
        const FieldAudit a = audit_field(f, m, u);
        CHECK(a.pass());
        CHECK(a.terminal_max_abs_error == 0.0);
        CHECK(a.growth_max_ratio <= a.growth_bound);
        CHECK(a.diff_max_ratio <= a.diff_bound);
    }
}

TEST_CASE("grid refinement keeps shrinking the closed-form error") {
    const CrraUtility u(0.5);
    const MarketModel m = no_claims_model();
    double prev = 0.0;
    for (int lvl = 0; lvl < 3; ++lvl) {
        GridSpec g;
        g.n_y = (32 << lvl) + 1;
        g.n_t = 32 << lvl;
        const DualField f = solve(m, u, g);
        double err = 0.0;
        for (double y : {0.1, 0.5, 1.0, 2.0, 5.0, 10.0}) {
            const double expected =
                oracles::claim_free_dual_closed_form(y, m.alpha, 0.0, 1.0);
            err = std::max(err, std::abs(f.slices[0].interpolate(y).value - expected) /
                                    expected);
        }
        if (lvl > 0) CHECK(prev / err >= 1.5);
        prev = err;
    }
}

TEST_CASE("an impossible stability bound raises CflViolation") {
    const CrraUtility u(0.5);
    MarketModel m = no_claims_model();
    m.alpha = 1e9;
    GridSpec g;
    g.n_y = 64;
    g.n_t = 4;
    CHECK_THROWS_AS(solve(m, u, g), CflViolation);
}

TEST_CASE("solver rejects grids violating their invariants") {
    const CrraUtility u(0.5);
    GridSpec g;
    g.n_y = 8; // below the minimum
    CHECK_THROWS_AS(solve(no_claims_model(), u, g), Error);
}

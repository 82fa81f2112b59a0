#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "riskdual/dual_solver.hpp"
#include "riskdual/simulator.hpp"
#include "riskdual/verify.hpp"

using namespace riskdual;

namespace {

MarketModel one_claim_model() {
    MarketModel m;
    m.alpha = 0.4;
    m.beta = 0.3;
    m.intensity = 1.0;
    m.claims = {{1.0, 1.0}};
    m.horizon = 1.0;
    return m;
}

} // namespace

TEST_CASE("claim-free paths are deterministic and exact for theta in {0, 1}") {
    MarketModel m;
    m.alpha = 0.3;
    m.beta = 0.1;
    m.intensity = 0.0;
    m.horizon = 1.0;
    const CrraUtility u(0.5);
    SimSpec spec;
    spec.n_paths = 500;
    spec.dt = 0.01;
    spec.seed = 3;

    for (double theta : {0.0, 1.0}) {
        const Strategy s = theta == 0.0 ? Strategy::zero() : Strategy::full();
        const SimReport r = simulate(m, u, s, 0.0, 1.0, spec);
        const double rate = m.alpha - m.beta * (1.0 - theta);
        const double expected = u.u(1.0 + rate * m.horizon);
        CHECK(r.estimate == expected); // bit-exact: one drift segment per path
        CHECK(r.ci_half_width == 0.0);
        CHECK(r.ruin_count == 0);
    }
}

TEST_CASE("constant retention matches the Poisson series oracle") {
    const MarketModel m = one_claim_model();
    const CrraUtility u(0.5);
    SimSpec spec;
    spec.n_paths = 40000;
    spec.dt = 0.01;
    spec.seed = 123;
    spec.threads = 2;

    for (double theta : {0.3, 0.7}) {
        const SimReport r = simulate(m, u, Strategy::constant_theta(theta), 0.0, 6.0, spec);
        REQUIRE(r.ruin_count == 0); // series only valid while projection is slack
        const double series = oracles::poisson_series_single_claim(m, u, theta, 0.0, 6.0);
        CHECK(std::abs(r.estimate - series) <= 3.0 * r.ci_half_width);
    }

    // Two claim types against the binomial-split series.
    MarketModel m2 = m;
    m2.claims = {{0.5, 0.5}, {1.5, 0.5}};
    const SimReport r2 = simulate(m2, u, Strategy::constant_theta(0.5), 0.0, 6.0, spec);
    REQUIRE(r2.ruin_count == 0);
    const double series2 = oracles::poisson_series_two_claims(m2, u, 0.5, 0.0, 6.0);
    CHECK(std::abs(r2.estimate - series2) <= 3.0 * r2.ci_half_width);
}

TEST_CASE("identical config and seed give bit-identical reports at any thread count") {
    const MarketModel m = one_claim_model();
    const CrraUtility u(0.5);
    SimSpec spec;
    spec.n_paths = 5000;
    spec.dt = 0.02;
    spec.seed = 99;

    spec.threads = 1;
    const SimReport a = simulate(m, u, Strategy::constant_theta(0.5), 0.0, 2.0, spec);
    const SimReport b = simulate(m, u, Strategy::constant_theta(0.5), 0.0, 2.0, spec);
    spec.threads = 8;
    const SimReport c = simulate(m, u, Strategy::constant_theta(0.5), 0.0, 2.0, spec);
    CHECK(a.estimate == b.estimate);
    CHECK(a.estimate == c.estimate);
    CHECK(a.ci_half_width == c.ci_half_width);
    CHECK(a.ruin_count == c.ruin_count);

    spec.seed = 100; // different seed, different sample
    const SimReport d = simulate(m, u, Strategy::constant_theta(0.5), 0.0, 2.0, spec);
    CHECK(a.estimate != d.estimate);
}

TEST_CASE("antithetic pairing keeps determinism and the oracle agreement") {
    const MarketModel m = one_claim_model();
    const CrraUtility u(0.5);
    SimSpec spec;
    spec.n_paths = 40000;
    spec.dt = 0.01;
    spec.seed = 7;
    spec.antithetic = true;
    spec.threads = 4;
    const SimReport r = simulate(m, u, Strategy::constant_theta(0.5), 0.0, 6.0, spec);
    REQUIRE(r.ruin_count == 0);
    const double series = oracles::poisson_series_single_claim(m, u, 0.5, 0.0, 6.0);
    CHECK(std::abs(r.estimate - series) <= 3.0 * r.ci_half_width);
    const SimReport again = simulate(m, u, Strategy::constant_theta(0.5), 0.0, 6.0, spec);
    CHECK(r.estimate == again.estimate);
}

TEST_CASE("paths honor the feasibility floor and the retention bound") {
    // beta > alpha with start barely above the threshold stresses the
    // projection.
    MarketModel m;
    m.alpha = 0.2;
    m.beta = 0.5;
    m.intensity = 2.0;
    m.claims = {{0.5, 0.5}, {1.0, 0.5}};
    m.horizon = 1.0;
    const CrraUtility u(0.5);
    SimSpec spec;
    spec.n_paths = 100;
    spec.dt = 0.02;
    spec.seed = 17;

    std::vector<TraceEvent> trace;
    const SimReport r = simulate(m, u, Strategy::full(), 0.0, 0.45, spec, &trace);
    CHECK(r.ruin_count > 0); // the cap must bite somewhere at this wealth
    REQUIRE(!trace.empty());
    for (const TraceEvent& e : trace) {
        CHECK(e.theta >= 0.0);
        CHECK(e.theta <= 1.0);
        if (e.event == "claim") CHECK(e.x >= -1e-12);
        if (e.event == "lookup" || e.event == "end")
            CHECK(e.x >= feasibility_threshold(m, std::min(e.t, m.horizon)) - 1e-12);
    }
}

TEST_CASE("quadrupling the path count halves the confidence width") {
    const MarketModel m = one_claim_model();
    const CrraUtility u(0.5);
    double ratio_sum = 0.0;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        SimSpec spec;
        spec.dt = 0.02;
        spec.seed = seed;
        spec.threads = 2;
        spec.n_paths = 4000;
        const SimReport small = simulate(m, u, Strategy::full(), 0.0, 2.0, spec);
        spec.n_paths = 16000;
        const SimReport big = simulate(m, u, Strategy::full(), 0.0, 2.0, spec);
        ratio_sum += small.ci_half_width / big.ci_half_width;
    }
    const double mean_ratio = ratio_sum / 5.0;
    CHECK(mean_ratio >= 1.6);
    CHECK(mean_ratio <= 2.4);
}

TEST_CASE("simulate rejects an infeasible start") {
    MarketModel m;
    m.alpha = 0.2;
    m.beta = 0.5;
    m.intensity = 1.0;
    m.claims = {{1.0, 1.0}};
    m.horizon = 1.0;
    const CrraUtility u(0.5);
    SimSpec spec;
    spec.n_paths = 100;
    spec.dt = 0.1;
    CHECK_THROWS_AS(simulate(m, u, Strategy::zero(), 0.0, 0.1, spec), InfeasibleStart);
}

TEST_CASE("brute-force DP: claim-free recursion recovers U(x + alpha T)") {
    MarketModel m;
    m.alpha = 0.3;
    m.beta = 0.1;
    m.intensity = 0.0;
    m.horizon = 1.0;
    const CrraUtility u(0.5);
    const DpTable dp = brute_force_primal_dp(m, u, 32, 256, 51, 5.0);
    for (double x : {0.5, 1.0, 2.0, 4.0}) {
        const double expected = u.u(x + m.alpha * m.horizon);
        CHECK(std::abs(dp.at(0.0, x) - expected) / expected <= 2e-3);
    }
}

TEST_CASE("brute-force DP dominates any fixed strategy estimate") {
    const MarketModel m = one_claim_model();
    const CrraUtility u(0.5);
    const DpTable dp = brute_force_primal_dp(m, u, 64, 512, 101, 4.4);
    SimSpec spec;
    spec.n_paths = 20000;
    spec.dt = 0.01;
    spec.seed = 21;
    spec.threads = 2;
    for (const Strategy& s :
         {Strategy::zero(), Strategy::constant_theta(0.5), Strategy::full()}) {
        const SimReport r = simulate(m, u, s, 0.0, 2.0, spec);
        CHECK(dp.at(0.0, 2.0) >= r.estimate - 2.0 * r.ci_half_width);
    }
}

TEST_CASE("brute-force DP refuses super-desk-scale requests") {
    const MarketModel m = one_claim_model();
    const CrraUtility u(0.5);
    CHECK_THROWS_AS(brute_force_primal_dp(m, u, 65, 128, 11, 4.0), ScaleExceeded);
    CHECK_THROWS_AS(brute_force_primal_dp(m, u, 32, 513, 11, 4.0), ScaleExceeded);
    MarketModel three = m;
    three.claims = {{0.5, 0.25}, {1.0, 0.25}, {2.0, 0.5}};
    CHECK_THROWS_AS(brute_force_primal_dp(three, u, 32, 128, 11, 4.0), ScaleExceeded);
}

TEST_CASE("weak duality certificate: tight on the claim-free instance") {
    MarketModel m;
    m.alpha = 0.3;
    m.beta = 0.1;
    m.intensity = 0.0;
    m.horizon = 1.0;
    const CrraUtility u(0.5);
    DualField f = solve(m, u, GridSpec{});
    SimSpec spec;
    spec.n_paths = 2000;
    spec.dt = 0.01;
    spec.seed = 4;

    const std::vector<Strategy> cands = {Strategy::zero(), Strategy::full()};
    const std::vector<double> probes = default_y_probes();
    const WeakDualityReport wd = weak_duality_check(m, u, f, 1.0, probes, spec, cands);
    CHECK(wd.pass);
    CHECK(wd.gap_fraction <= 0.01 + 1e-9); // both sides nearly exact here
    CHECK(wd.lower_bound == doctest::Approx(u.u(1.3)).epsilon(1e-12));

    // A single enormous probe gives a loose but valid certificate.
    const std::vector<double> huge = {900.0};
    CHECK(weak_duality_check(m, u, f, 1.0, huge, spec, cands).pass);

    // Lowering the whole field by 10% must break the certificate.
    for (auto& slice : f.slices) {
        for (double& v : slice.mutable_values()) v *= 0.9;
        slice.refit_tails();
    }
    const WeakDualityReport broken = weak_duality_check(m, u, f, 1.0, probes, spec, cands);
    CHECK_FALSE(broken.pass);
    CHECK(broken.tightest_gap < 0.0);
}

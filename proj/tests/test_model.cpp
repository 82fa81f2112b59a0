#include <doctest.h>

#include <cmath>

#include "riskdual/config.hpp"
#include "riskdual/model.hpp"

using namespace riskdual;

namespace {

ProblemConfig basic_config() {
    ProblemConfig cfg;
    cfg.model.alpha = 0.3;
    cfg.model.beta = 0.1;
    cfg.model.intensity = 1.0;
    cfg.model.claims = {{1.0, 1.0}};
    cfg.model.horizon = 1.0;
    cfg.eta = 0.5;
    return cfg;
}

} // namespace

TEST_CASE("validate accepts the basic instance and derives gamma") {
    const Validated v = validate(basic_config());
    REQUIRE(v.ok());
    CHECK(v.config->utility().gamma() == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(v.config->model.claim_intensity(0) == 1.0);
}

TEST_CASE("validate rejects eta outside (0,1)") {
    ProblemConfig cfg = basic_config();
    cfg.eta = 1.2;
    const Validated v = validate(cfg);
    REQUIRE_FALSE(v.ok());
    bool found = false;
    for (const auto& issue : v.issues)
        if (issue.code == ConfigIssueCode::BadEta) found = true;
    CHECK(found);
}

TEST_CASE("validate rejects unnormalized weights") {
    ProblemConfig cfg = basic_config();
    cfg.model.claims = {{1.0, 0.5}, {2.0, 0.6}};
    const Validated v = validate(cfg);
    REQUIRE_FALSE(v.ok());
    bool found = false;
    for (const auto& issue : v.issues)
        if (issue.code == ConfigIssueCode::WeightsNotNormalized) found = true;
    CHECK(found);
}

TEST_CASE("validate renormalizes weights within 1e-9 and sorts claims") {
    ProblemConfig cfg = basic_config();
    cfg.model.claims = {{2.0, 0.5 + 4e-10}, {1.0, 0.5}};
    const Validated v = validate(cfg);
    REQUIRE(v.ok());
    const auto& claims = v.config->model.claims;
    REQUIRE(claims.size() == 2);
    CHECK(claims[0].delta == 1.0);
    CHECK(claims[1].delta == 2.0);
    double total = 0.0;
    for (const auto& c : claims) total += c.prob;
    CHECK(std::abs(total - 1.0) <= 1e-12);
    // Per-claim intensities recover the total rate exactly as stored.
    CHECK(v.config->model.claim_intensity(0) + v.config->model.claim_intensity(1) ==
          doctest::Approx(v.config->model.intensity).epsilon(1e-15));
}

TEST_CASE("validate flags an empty claim menu under positive intensity") {
    ProblemConfig cfg = basic_config();
    cfg.model.claims.clear();
    const Validated v = validate(cfg);
    REQUIRE_FALSE(v.ok());
    CHECK(v.issues.front().code == ConfigIssueCode::EmptyClaims);
}

TEST_CASE("validate reports every violated invariant at once") {
    ProblemConfig cfg = basic_config();
    cfg.model.alpha = -1.0;
    cfg.eta = 1.5;
    cfg.model.horizon = -2.0;
    const Validated v = validate(cfg);
    CHECK(v.issues.size() >= 3);
}

TEST_CASE("CRRA calculus: the four functions at eta = 0.5") {
    const CrraUtility u(0.5);
    CHECK(u.gamma() == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(utility_eval(u, UtilityFn::Utilde, 2.0) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(utility_eval(u, UtilityFn::I, 4.0) == doctest::Approx(0.0625).epsilon(1e-15));
    CHECK(utility_eval(u, UtilityFn::U, 4.0) == doctest::Approx(4.0).epsilon(1e-15));
    CHECK(utility_eval(u, UtilityFn::Uprime, 4.0) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(utility_eval(u, UtilityFn::UtildePrime, 4.0) ==
          doctest::Approx(-0.0625).epsilon(1e-15));
    CHECK(u.u(0.0) == 0.0);
}

TEST_CASE("conjugacy identity Utilde(y) = U(I(y)) - y I(y)") {
    // At eta = 0.5, y = 3: U(I(3)) - 3 I(3) = 2/3 - 1/3 = 1/3.
    const CrraUtility u(0.5);
    CHECK(u.u(u.inverse_marginal(3.0)) - 3.0 * u.inverse_marginal(3.0) ==
          doctest::Approx(1.0 / 3.0).epsilon(1e-15));

    for (double eta : {0.2, 0.5, 0.8}) {
        const CrraUtility cu(eta);
        for (int k = -6; k <= 6; ++k) {
            const double y = std::pow(10.0, k / 2.0);
            const double direct = cu.conjugate(y);
            const double via_envelope = cu.u(cu.inverse_marginal(y)) - y * cu.inverse_marginal(y);
            CHECK(std::abs(direct - via_envelope) <= 1e-12 * (1.0 + std::abs(direct)));
        }
    }
}

TEST_CASE("biconjugacy: min over a fine y grid of Utilde + x y recovers U") {
    for (double eta : {0.3, 0.5, 0.7}) {
        const CrraUtility u(eta);
        for (double x : {0.1, 1.0, 10.0}) {
            double best = 1e300;
            const int n = 4001;
            for (int k = 0; k < n; ++k) {
                const double y = std::exp(std::log(1e-4) +
                                          (std::log(1e4) - std::log(1e-4)) * k / (n - 1.0));
                best = std::min(best, u.conjugate(y) + x * y);
            }
            // Grid resolution: quadratic in the log spacing around the minimum.
            const double h = std::log(1e8) / (n - 1.0);
            const double tol = (u.gamma() + 1.0) * h * h;
            CHECK(std::abs(best - u.u(x)) / u.u(x) <= tol);
        }
    }
}

TEST_CASE("dual-side utility functions reject nonpositive arguments") {
    const CrraUtility u(0.5);
    CHECK_THROWS_AS(utility_eval(u, UtilityFn::Utilde, 0.0), NonpositiveArgument);
    CHECK_THROWS_AS(utility_eval(u, UtilityFn::I, -1.0), NonpositiveArgument);
    CHECK_THROWS_AS(utility_eval(u, UtilityFn::Uprime, 0.0), NonpositiveArgument);
    CHECK_NOTHROW(utility_eval(u, UtilityFn::U, 0.0));
    CHECK_THROWS_AS(utility_eval(u, UtilityFn::U, -0.5), NonpositiveArgument);
}

TEST_CASE("feasibility threshold: b(t) = max(0, beta - alpha) (T - t)") {
    MarketModel m;
    m.alpha = 0.2;
    m.beta = 0.5;
    m.horizon = 1.0;
    CHECK(feasibility_threshold(m, 0.0) == doctest::Approx(0.3).epsilon(1e-15));
    CHECK(feasibility_threshold(m, 1.0) == 0.0);

    m.alpha = 0.5;
    m.beta = 0.2;
    CHECK(feasibility_threshold(m, 0.0) == 0.0);
    CHECK(feasibility_threshold(m, 0.7) == 0.0);

    CHECK_THROWS_AS(feasibility_threshold(m, -0.1), std::out_of_range);
    CHECK_THROWS_AS(feasibility_threshold(m, 1.5), std::out_of_range);
}

TEST_CASE("feasibility threshold is nonincreasing in t and zero at T") {
    MarketModel m;
    m.alpha = 0.1;
    m.beta = 0.9;
    m.horizon = 2.0;
    double prev = feasibility_threshold(m, 0.0);
    for (int k = 1; k <= 40; ++k) {
        const double t = 2.0 * k / 40.0;
        const double b = feasibility_threshold(m, t);
        CHECK(b <= prev + 1e-15);
        prev = b;
    }
    CHECK(feasibility_threshold(m, 2.0) == 0.0);
}

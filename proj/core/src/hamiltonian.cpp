#include "riskdual/hamiltonian.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace riskdual {

namespace {

constexpr int kSeedCount = 33;
constexpr double kRelTol = 1e-8;
const double kInvPhi = (std::sqrt(5.0) - 1.0) / 2.0;

// Log-spaced scan of [lo, hi] followed by golden-section refinement of the
// best bracket. Returns the abscissa only; callers re-evaluate the true
// objective at the returned point.
template <typename F>
double minimize_scalar(F&& f, double lo, double hi) {
    if (hi <= lo) return lo;
    double seeds[kSeedCount];
    const double log_lo = std::log(lo);
    const double step = (std::log(hi) - log_lo) / (kSeedCount - 1);
    int best = 0;
    double best_f = std::numeric_limits<double>::infinity();
    for (int k = 0; k < kSeedCount; ++k) {
        seeds[k] = std::exp(log_lo + k * step);
        const double fk = f(seeds[k]);
        if (fk < best_f) {
            best_f = fk;
            best = k;
        }
    }
    seeds[0] = lo;
    seeds[kSeedCount - 1] = hi;
    double a = seeds[std::max(0, best - 1)];
    double b = seeds[std::min(kSeedCount - 1, best + 1)];
    double c = b - kInvPhi * (b - a);
    double d = a + kInvPhi * (b - a);
    double fc = f(c);
    double fd = f(d);
    while (b - a > kRelTol * b) {
        if (fc < fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - kInvPhi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + kInvPhi * (b - a);
            fd = f(d);
        }
    }
    const double mid = 0.5 * (a + b);
    return f(mid) <= best_f ? mid : seeds[best];
}

} // namespace

double rho_bar(const MarketModel& model) {
    if (model.claims.empty() || model.intensity <= 0.0) return 0.0;
    double min_dp = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < model.claims.size(); ++i)
        min_dp = std::min(min_dp, model.claims[i].delta * model.claim_intensity(i));
    return min_dp > 0.0 ? model.beta / min_dp : 0.0;
}

ControlBox node_control_box(const MarketModel& model, double y_node,
                            double y_max, double rho_floor) {
    ControlBox box;
    box.rho_floor = rho_floor;
    box.rho_cap = std::max({rho_bar(model), y_max / y_node, 10.0});
    return box;
}

double premium_rate(const MarketModel& model, std::span<const double> rho) {
    double s = 0.0;
    for (std::size_t i = 0; i < rho.size(); ++i)
        s += rho[i] * model.claims[i].delta * model.claim_intensity(i);
    return model.alpha - model.beta + std::max(0.0, model.beta - s);
}

double a_rho(const ValueSlice& slice, double y, double p,
             std::span<const double> rho, const MarketModel& model) {
    if (!(y > 0.0)) throw NonpositiveQuery(y);
    const double v_y = slice.interpolate(y).value;
    double acc = 0.0;
    for (std::size_t i = 0; i < rho.size(); ++i) {
        const double pi_i = model.claim_intensity(i);
        acc += pi_i * (slice.interpolate(rho[i] * y).value - v_y - (rho[i] - 1.0) * y * p);
    }
    return acc;
}

HamiltonianResult minimize_hamiltonian(const ValueSlice& slice,
                                       std::size_t node_index,
                                       const MarketModel& model,
                                       const ControlBox& box) {
    if (!slice.all_finite())
        throw DegenerateSlice("minimize_hamiltonian: slice has non-finite values");
    if (!(box.rho_floor > 0.0) || box.rho_floor > box.rho_cap)
        throw EmptyBox("minimize_hamiltonian: empty control box");

    const double y = slice.y_nodes()[node_index];
    const double p = slice.derivative_at(node_index);
    const std::size_t d = model.claim_count();

    HamiltonianResult result;
    long evals = 0;

    auto objective = [&](std::span<const double> rho) {
        ++evals;
        return a_rho(slice, y, p, rho, model) + y * premium_rate(model, rho);
    };

    if (d == 0 || model.intensity <= 0.0) {
        // Empty claim sum: A^rho vanishes and the premium term is constant.
        std::vector<double> rho(d, std::clamp(1.0, box.rho_floor, box.rho_cap));
        result.value = objective(rho);
        result.minimizer = std::move(rho);
        result.regime = model.beta <= 0.0 ? HamiltonianResult::Regime::A
                                          : HamiltonianResult::Regime::B;
        result.evaluations = evals;
        return result;
    }

    const double beta = model.beta;
    auto weighted_sum = [&](const std::vector<double>& rho) {
        double s = 0.0;
        for (std::size_t i = 0; i < d; ++i)
            s += rho[i] * model.claims[i].delta * model.claim_intensity(i);
        return s;
    };

    // Coordinate objective: pi_i * (v(r y) - r y p) + extra * r, where extra
    // carries the (scaled) open-positive-part premium slope.
    auto solve_separable = [&](double premium_scale) {
        std::vector<double> rho(d);
        for (std::size_t i = 0; i < d; ++i) {
            const double pi_i = model.claim_intensity(i);
            const double extra = -premium_scale * y * model.claims[i].delta * pi_i;
            rho[i] = minimize_scalar(
                [&](double r) {
                    ++evals;
                    return pi_i * (slice.interpolate(r * y).value - r * y * p) + extra * r;
                },
                box.rho_floor, box.rho_cap);
        }
        return rho;
    };

    std::vector<std::vector<double>> candidates;

    // Regime B: positive part open, premium slope fully active.
    std::vector<double> rho_b = solve_separable(1.0);
    const double s_b = weighted_sum(rho_b);
    // Regime A: positive part closed.
    std::vector<double> rho_a = solve_separable(0.0);
    const double s_a = weighted_sum(rho_a);

    candidates.push_back(rho_b);
    candidates.push_back(rho_a);

    // Neither separable optimum lands in its own regime: the constrained
    // optimum sits on the boundary sum rho_i delta_i pi_i = beta. Sweep the
    // premium multiplier until the boundary is hit.
    if (s_a < beta && s_b > beta) {
        double lo = 0.0, hi = 1.0;
        std::vector<double> rho_mid;
        for (int it = 0; it < 64; ++it) {
            const double mid = 0.5 * (lo + hi);
            rho_mid = solve_separable(mid);
            const double s_mid = weighted_sum(rho_mid);
            if (std::abs(s_mid - beta) <= 1e-12 * std::max(1.0, beta)) break;
            if (s_mid < beta)
                lo = mid;
            else
                hi = mid;
        }
        if (!rho_mid.empty()) candidates.push_back(std::move(rho_mid));
    }

    // Cheap extra candidates: the unit distortion and boundary rescalings.
    {
        std::vector<double> ones(d, std::clamp(1.0, box.rho_floor, box.rho_cap));
        candidates.push_back(std::move(ones));
        for (const auto* base : {&rho_b, &rho_a}) {
            const double s = weighted_sum(*base);
            if (s > 0.0 && beta > 0.0) {
                std::vector<double> scaled(d);
                for (std::size_t i = 0; i < d; ++i)
                    scaled[i] = std::clamp((*base)[i] * beta / s, box.rho_floor, box.rho_cap);
                candidates.push_back(std::move(scaled));
            }
        }
    }

    double best_value = std::numeric_limits<double>::infinity();
    std::vector<double> best_rho;
    for (auto& rho : candidates) {
        for (auto& r : rho) r = std::clamp(r, box.rho_floor, box.rho_cap);
        const double v = objective(rho);
        if (v < best_value) {
            best_value = v;
            best_rho = rho;
        }
    }

    if (!std::isfinite(best_value))
        throw DegenerateSlice("minimize_hamiltonian: non-finite objective");

    result.value = best_value;
    result.regime = weighted_sum(best_rho) >= beta ? HamiltonianResult::Regime::A
                                                   : HamiltonianResult::Regime::B;
    for (double r : best_rho) {
        if (r <= box.rho_floor * (1.0 + 1e-9)) result.floor_hit = true;
        if (r >= box.rho_cap * (1.0 - 1e-9)) result.cap_hit = true;
    }
    result.minimizer = std::move(best_rho);
    result.evaluations = evals;
    return result;
}

} // namespace riskdual

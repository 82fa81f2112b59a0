#include "riskdual/primal.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace riskdual {

namespace {

const double kInvPhi = (std::sqrt(5.0) - 1.0) / 2.0;

std::size_t nearest_node(const std::vector<double>& y, double target) {
    const auto it = std::lower_bound(y.begin(), y.end(), target);
    if (it == y.begin()) return 0;
    if (it == y.end()) return y.size() - 1;
    const std::size_t hi = static_cast<std::size_t>(it - y.begin());
    // Log-spaced grid: compare in ratio rather than distance.
    return target / y[hi - 1] < y[hi] / target ? hi - 1 : hi;
}

} // namespace

LegendreResult legendre(const DualField& field, const MarketModel& model,
                        double t, double x) {
    const double tc = std::clamp(t, 0.0, model.horizon);
    const double threshold = feasibility_threshold(model, tc);
    if (x < threshold) throw InfeasibleWealth(x, threshold);

    LegendreResult out;
    const std::size_t k = field.nearest_layer(tc, &out.time_offset);
    const ValueSlice& slice = field.slices[k];
    const std::vector<double>& y = slice.y_nodes();
    const std::vector<double>& v = slice.values();
    const std::size_t n = y.size();

    std::size_t best = 0;
    double best_val = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < n; ++j) {
        const double val = v[j] + x * y[j];
        if (val < best_val) {
            best_val = val;
            best = j;
        }
    }

    // Golden-section refinement between the bracketing nodes. The objective
    // is piecewise linear, so this can only sharpen the node minimum.
    double a = y[best > 0 ? best - 1 : 0];
    double b = y[std::min(best + 1, n - 1)];
    auto phi = [&](double yy) { return slice.interpolate(yy).value + x * yy; };
    if (b > a) {
        double c = b - kInvPhi * (b - a);
        double d = a + kInvPhi * (b - a);
        double fc = phi(c);
        double fd = phi(d);
        while (b - a > 1e-10 * b) {
            if (fc < fd) {
                b = d;
                d = c;
                fd = fc;
                c = b - kInvPhi * (b - a);
                fc = phi(c);
            } else {
                a = c;
                c = d;
                fc = fd;
                d = a + kInvPhi * (b - a);
                fd = phi(d);
            }
        }
        const double mid = 0.5 * (a + b);
        const double fm = phi(mid);
        if (fm < best_val) {
            best_val = fm;
            out.y_star = mid;
        } else {
            out.y_star = y[best];
        }
    } else {
        out.y_star = y[best];
    }

    out.value = best_val;
    out.boundary = best == 0 || best == n - 1;
    return out;
}

double optimal_wealth_map(const DualField& field, double t, double y) {
    if (!(y > 0.0)) throw NonpositiveQuery(y);
    const std::size_t k = field.nearest_layer(t);
    const ValueSlice& slice = field.slices[k];
    const std::vector<double>& yn = slice.y_nodes();

    if (y <= yn.front()) {
        // Power-tail derivative: d/dy [c y^-g] = -g c y^-(g+1).
        const double g = slice.gamma();
        return g * slice.left_tail_coeff() * std::pow(y, -(g + 1.0));
    }
    if (y >= yn.back()) return -slice.right_tail_slope();

    const auto it = std::upper_bound(yn.begin(), yn.end(), y);
    const std::size_t hi = static_cast<std::size_t>(it - yn.begin());
    const std::size_t lo = hi - 1;
    const double d_lo = slice.derivative_at(lo);
    const double d_hi = slice.derivative_at(hi);
    const double w = (y - yn[lo]) / (yn[hi] - yn[lo]);
    return -((1.0 - w) * d_lo + w * d_hi);
}

StrategyEstimate candidate_strategy(const DualField& field, const MarketModel& model,
                                    double t, double x) {
    StrategyEstimate est;
    if (model.claim_count() == 0 || model.intensity <= 0.0) {
        // No claims: full retention is drift-optimal and there is nothing to
        // match jumps against.
        est.theta_hat = 1.0;
        est.consistency = 0.0;
        return est;
    }

    const LegendreResult leg = legendre(field, model, t, x); // throws if infeasible
    const double y_star = leg.y_star;
    const std::size_t k = field.nearest_layer(std::clamp(t, 0.0, model.horizon));
    const std::size_t j = nearest_node(field.slices[k].y_nodes(), y_star);
    const std::vector<double>& rho = field.controls[k][j];

    const double x_here = optimal_wealth_map(field, t, y_star);
    std::vector<double> theta_i(model.claim_count());
    double mean = 0.0;
    for (std::size_t i = 0; i < model.claim_count(); ++i) {
        const double x_jumped = optimal_wealth_map(field, t, rho[i] * y_star);
        theta_i[i] = (x_here - x_jumped) / model.claims[i].delta;
        mean += model.claims[i].prob * theta_i[i];
    }
    est.theta_hat = std::clamp(mean, 0.0, 1.0);
    est.consistency = 0.0;
    for (double th : theta_i)
        est.consistency = std::max(est.consistency, std::abs(th - est.theta_hat));
    return est;
}

PrimalSlice transform_slice(const DualField& field, const MarketModel& model,
                            double t, std::span<const double> x_nodes) {
    PrimalSlice out;
    out.t = t;
    out.x_nodes.assign(x_nodes.begin(), x_nodes.end());
    out.value.reserve(x_nodes.size());
    out.y_star.reserve(x_nodes.size());
    out.theta_hat.reserve(x_nodes.size());
    out.consistency.reserve(x_nodes.size());
    for (double x : x_nodes) {
        const LegendreResult leg = legendre(field, model, t, x);
        const StrategyEstimate est = candidate_strategy(field, model, t, x);
        out.value.push_back(leg.value);
        out.y_star.push_back(leg.y_star);
        out.theta_hat.push_back(est.theta_hat);
        out.consistency.push_back(est.consistency);
    }
    return out;
}

} // namespace riskdual

#include "riskdual/value_slice.hpp"

#include <algorithm>
#include <cmath>

namespace riskdual {

ValueSlice::ValueSlice(std::vector<double> y_nodes, std::vector<double> values,
                       double time_label, double gamma)
    : y_(std::move(y_nodes)), v_(std::move(values)), t_(time_label), gamma_(gamma) {
    if (y_.size() < 2 || y_.size() != v_.size())
        throw DegenerateSlice("ValueSlice needs at least two matched nodes");
    for (std::size_t j = 0; j + 1 < y_.size(); ++j)
        if (!(y_[j] > 0.0) || !(y_[j] < y_[j + 1]))
            throw DegenerateSlice("ValueSlice nodes must be positive and strictly increasing");
    refit_tails();
}

void ValueSlice::refit_tails() {
    const std::size_t n = y_.size();
    // Left: anchor the y^(-gamma) power law at the first node.
    c_lo_ = v_.front() * std::pow(y_.front(), gamma_);
    // Right: continue the last segment.
    slope_hi_ = (v_[n - 1] - v_[n - 2]) / (y_[n - 1] - y_[n - 2]);
    intercept_hi_ = v_[n - 1] - slope_hi_ * y_[n - 1];
}

ValueSlice::Eval ValueSlice::interpolate(double y) const {
    if (!(y > 0.0)) throw NonpositiveQuery(y);
    const std::size_t n = y_.size();
    if (y < y_.front()) {
        const double value = c_lo_ * std::pow(y, -gamma_);
        return {value, -gamma_ * value / y};
    }
    if (y > y_.back()) {
        return {slope_hi_ * y + intercept_hi_, slope_hi_};
    }
    // Segment lookup; exact node hits return the stored value.
    const auto it = std::upper_bound(y_.begin(), y_.end(), y);
    std::size_t hi = static_cast<std::size_t>(it - y_.begin());
    if (hi == 0) hi = 1;
    if (hi == n) hi = n - 1;
    const std::size_t lo = hi - 1;
    const double slope = (v_[hi] - v_[lo]) / (y_[hi] - y_[lo]);
    if (y == y_[lo]) return {v_[lo], slope};
    if (y == y_[hi]) return {v_[hi], slope};
    return {v_[lo] + slope * (y - y_[lo]), slope};
}

double ValueSlice::derivative_at(std::size_t j) const {
    const std::size_t n = y_.size();
    if (j == 0) return (v_[1] - v_[0]) / (y_[1] - y_[0]);
    if (j == n - 1) return (v_[n - 1] - v_[n - 2]) / (y_[n - 1] - y_[n - 2]);
    return (v_[j + 1] - v_[j - 1]) / (y_[j + 1] - y_[j - 1]);
}

bool ValueSlice::all_finite() const {
    return std::all_of(v_.begin(), v_.end(),
                       [](double x) { return std::isfinite(x); });
}

} // namespace riskdual

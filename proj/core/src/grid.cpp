#include "riskdual/grid.hpp"

#include <cmath>

namespace riskdual {

std::vector<double> GridSpec::make_y_nodes() const {
    std::vector<double> y(n_y);
    const double log_lo = std::log(y_min);
    const double log_hi = std::log(y_max);
    for (std::size_t j = 0; j < n_y; ++j) {
        const double s = static_cast<double>(j) / static_cast<double>(n_y - 1);
        y[j] = std::exp(log_lo + s * (log_hi - log_lo));
    }
    // Pin the endpoints so y_min/y_max are representable exactly.
    y.front() = y_min;
    y.back() = y_max;
    return y;
}

std::vector<double> GridSpec::make_times(double horizon) const {
    std::vector<double> t(n_t + 1);
    for (std::size_t k = 0; k <= n_t; ++k)
        t[k] = horizon * static_cast<double>(k) / static_cast<double>(n_t);
    t.back() = horizon;
    return t;
}

} // namespace riskdual

#include "riskdual/model.hpp"

#include <algorithm>
#include <stdexcept>

namespace riskdual {

double utility_eval(const CrraUtility& u, UtilityFn which, double arg) {
    switch (which) {
        case UtilityFn::U:           return u.u(arg);
        case UtilityFn::Uprime:      return u.u_prime(arg);
        case UtilityFn::I:           return u.inverse_marginal(arg);
        case UtilityFn::Utilde:      return u.conjugate(arg);
        case UtilityFn::UtildePrime: return u.conjugate_prime(arg);
    }
    throw std::invalid_argument("unknown utility function selector");
}

double feasibility_threshold(const MarketModel& model, double t) {
    if (t < 0.0 || t > model.horizon)
        throw std::out_of_range("feasibility_threshold: t outside [0, T]");
    return std::max(0.0, model.beta - model.alpha) * (model.horizon - t);
}

} // namespace riskdual

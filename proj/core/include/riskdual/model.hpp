#ifndef RISKDUAL_MODEL_HPP
#define RISKDUAL_MODEL_HPP

#include <cmath>
#include <cstddef>
#include <vector>

#include "riskdual/errors.hpp"

namespace riskdual {

// One claim type: a fixed size and its probability weight in the claim menu.
struct Claim {
    double delta = 0.0; // claim size, currency
    double prob  = 0.0; // probability weight, sums to 1 over the menu
};

// Problem data for the proportional-insurance market.
//
// The agent receives premium at rate alpha, pays the insurer at rate
// beta*(1-theta), and absorbs theta*z of every claim z. Claims arrive as a
// compound Poisson process with total intensity `intensity` and sizes drawn
// from the finite menu `claims`. Both premium orderings (alpha >= beta and
// beta > alpha) are supported; the feasibility threshold below degenerates
// to zero in the first case.
struct MarketModel {
    double alpha     = 0.0; // premium rate received
    double beta      = 0.0; // premium rate paid to the insurer
    double intensity = 0.0; // total claim arrival rate
    std::vector<Claim> claims;
    double horizon   = 1.0; // terminal time T

    std::size_t claim_count() const { return claims.size(); }

    // Per-claim arrival intensity pi_i = intensity * p_i.
    double claim_intensity(std::size_t i) const {
        return intensity * claims[i].prob;
    }

    double max_claim() const {
        double m = 0.0;
        for (const auto& c : claims) m = std::max(m, c.delta);
        return m;
    }

    // Expected aggregate claim rate sum_i delta_i * pi_i.
    double mean_claim_rate() const {
        double s = 0.0;
        for (std::size_t i = 0; i < claims.size(); ++i)
            s += claims[i].delta * claim_intensity(i);
        return s;
    }
};

// CRRA utility U(x) = x^eta / eta with eta in (0,1), together with the
// derived calculus used on the dual side:
//   gamma        = eta / (1 - eta)
//   U'(x)        = x^(eta-1)
//   I(y)         = (U')^{-1}(y) = y^{-(gamma+1)}
//   Utilde(y)    = sup_x [U(x) - x y] = y^{-gamma} / gamma
//   Utilde'(y)   = -I(y)
// U(0) is defined as the limit value 0.
class CrraUtility {
public:
    explicit CrraUtility(double eta) : eta_(eta), gamma_(eta / (1.0 - eta)) {}

    double eta() const { return eta_; }
    double gamma() const { return gamma_; }

    double u(double x) const {
        if (x < 0.0) throw NonpositiveArgument("U", x);
        if (x == 0.0) return 0.0;
        return std::pow(x, eta_) / eta_;
    }

    double u_prime(double x) const {
        if (x <= 0.0) throw NonpositiveArgument("U'", x);
        return std::pow(x, eta_ - 1.0);
    }

    double inverse_marginal(double y) const {
        if (y <= 0.0) throw NonpositiveArgument("I", y);
        return std::pow(y, -(gamma_ + 1.0));
    }

    double conjugate(double y) const {
        if (y <= 0.0) throw NonpositiveArgument("Utilde", y);
        return std::pow(y, -gamma_) / gamma_;
    }

    double conjugate_prime(double y) const {
        if (y <= 0.0) throw NonpositiveArgument("Utilde'", y);
        return -inverse_marginal(y);
    }

private:
    double eta_;
    double gamma_;
};

enum class UtilityFn { U, Uprime, I, Utilde, UtildePrime };

// Named-function dispatcher over the CRRA calculus.
double utility_eval(const CrraUtility& u, UtilityFn which, double arg);

// Minimal wealth from which an admissible strategy exists:
//   b(t) = max(0, beta - alpha) * (T - t),
// clamped at zero because wealth is constrained nonnegative.
double feasibility_threshold(const MarketModel& model, double t);

} // namespace riskdual

#endif // RISKDUAL_MODEL_HPP

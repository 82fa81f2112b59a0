#ifndef RISKDUAL_ERRORS_HPP
#define RISKDUAL_ERRORS_HPP

#include <cstdio>
#include <stdexcept>
#include <string>

namespace riskdual {

namespace detail {
inline std::string short_num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}
} // namespace detail

// Base class for everything this library throws on its own behalf.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Interpolation / Hamiltonian evaluation at y <= 0.
class NonpositiveQuery : public Error {
public:
    explicit NonpositiveQuery(double y)
        : Error("nonpositive dual-state query y=" + detail::short_num(y)) {}
};

// Utility functions on the dual side need a strictly positive argument.
class NonpositiveArgument : public Error {
public:
    explicit NonpositiveArgument(const std::string& fn, double arg)
        : Error(fn + " requires a positive argument, got " + detail::short_num(arg)) {}
};

class DegenerateSlice : public Error {
public:
    explicit DegenerateSlice(const std::string& what) : Error(what) {}
};

class EmptyBox : public Error {
public:
    explicit EmptyBox(const std::string& what) : Error(what) {}
};

// Time step exceeds the stability bound even after the maximum number of
// internal halvings.
class CflViolation : public Error {
public:
    CflViolation(double dt, double dt_max)
        : Error("time step " + detail::short_num(dt) +
                " exceeds stability bound " + detail::short_num(dt_max) +
                " after maximal sub-stepping") {}
};

class NonconvergedPolicyIteration : public Error {
public:
    explicit NonconvergedPolicyIteration(const std::string& what) : Error(what) {}
};

class NonfiniteValue : public Error {
public:
    explicit NonfiniteValue(const std::string& what) : Error(what) {}
};

// Wealth below the feasibility threshold b(t).
class InfeasibleWealth : public Error {
public:
    InfeasibleWealth(double x, double threshold)
        : Error("wealth " + detail::short_num(x) + " below feasibility threshold " +
                detail::short_num(threshold)) {}
};

class InfeasibleStart : public Error {
public:
    InfeasibleStart(double x0, double threshold)
        : Error("initial wealth " + detail::short_num(x0) +
                " below feasibility threshold " + detail::short_num(threshold)) {}
};

// Brute-force dynamic programming is deliberately capped at desk scale.
class ScaleExceeded : public Error {
public:
    explicit ScaleExceeded(const std::string& what) : Error(what) {}
};

} // namespace riskdual

#endif // RISKDUAL_ERRORS_HPP

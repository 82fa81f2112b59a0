#ifndef RISKDUAL_RNG_HPP
#define RISKDUAL_RNG_HPP

#include <cstdint>
#include <span>

namespace riskdual {

// Counter-based stream generator: each (seed, stream) pair owns an
// independent splitmix64 sequence, so path i can be simulated on any thread,
// in any order, with bit-identical output.
class PathRng {
public:
    PathRng(std::uint64_t seed, std::uint64_t stream)
        : state_(mix(mix(seed ^ 0x9e3779b97f4a7c15ull) ^ stream)) {}

    std::uint64_t next_u64() {
        state_ += 0x9e3779b97f4a7c15ull;
        return mix(state_);
    }

    // Uniform on the open interval (0, 1).
    double uniform() {
        return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
    }

private:
    static std::uint64_t mix(std::uint64_t z) {
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    std::uint64_t state_;
};

// Uniform source with an antithetic flip, shared by paired paths.
struct UniformSource {
    PathRng rng;
    bool flip = false;

    double next() {
        const double u = rng.uniform();
        return flip ? 1.0 - u : u;
    }
};

} // namespace riskdual

#endif // RISKDUAL_RNG_HPP

#include "deconv/rng.hpp"

#include <cmath>
#include <stdexcept>

namespace deconv {

namespace detail {

std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

}  // namespace detail

RngStream::RngStream(std::uint64_t seed) : engine_(seed) {}

RngStream RngStream::derive(std::uint64_t seed, std::uint64_t run, std::uint64_t role) {
    std::uint64_t state = seed;
    (void)detail::splitmix64(state);
    state ^= 0x517cc1b727220a95ULL * (run + 1);
    (void)detail::splitmix64(state);
    state ^= 0x2545f4914f6cdd1dULL * (role + 1);
    return RngStream(detail::splitmix64(state));
}

double RngStream::uniform() {
    // 53-bit mantissa draw on (0,1): (x >> 11) in [0, 2^53), shifted by 1/2 ulp.
    return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
}

double RngStream::normal() {
    if (have_spare_) {
        have_spare_ = false;
        return spare_;
    }
    double u, v, s;
    do {
        u = 2.0 * uniform() - 1.0;
        v = 2.0 * uniform() - 1.0;
        s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double m = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * m;
    have_spare_ = true;
    return u * m;
}

double RngStream::gamma(double shape) {
    if (!(shape > 0.0)) throw std::invalid_argument("gamma shape must be positive");
    if (shape < 1.0) {
        // boost: G(a) = G(a+1) * U^{1/a}
        const double g = gamma(shape + 1.0);
        return g * std::pow(uniform(), 1.0 / shape);
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
        double x, v;
        do {
            x = normal();
            v = 1.0 + c * x;
        } while (v <= 0.0);
        v = v * v * v;
        const double u = uniform();
        if (u < 1.0 - 0.0331 * (x * x) * (x * x)) return d * v;
        if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
    }
}

double RngStream::exponential() { return -std::log(uniform()); }

}  // namespace deconv

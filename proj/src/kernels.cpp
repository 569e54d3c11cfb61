#include "deconv/kernels.hpp"

#include <cmath>

#include "deconv/quadrature.hpp"

namespace deconv {

double kft(const Kernel& k, double t) {
    const double a = std::abs(t);
    if (a >= 1.0) return 0.0;
    double tr = 1.0;
    for (int i = 0; i < k.r; ++i) tr *= a;
    const double base = 1.0 - tr;
    double out = 1.0;
    for (int i = 0; i < k.s; ++i) out *= base;
    return out;
}

double kappa2(const Kernel& k) {
    // (1 - t^r)^s = 1 - s t^r + ...; the t^2 coefficient is -s iff r = 2.
    return (k.r == 2) ? 2.0 * static_cast<double>(k.s) : 0.0;
}

double kernel_real(const Kernel& k, double x) {
    const double ax = std::abs(x);
    auto f = [&](double t) { return kft(k, t); };
    const GaussLegendre& gl = GaussLegendre::rule(32);
    // 64 x 32-point panels resolve the cosine up to |x| ~ 50; beyond that,
    // keep at least panels_per_period panels per cosine period.
    long panels = 64;
    if (ax > 50.0) panels = static_cast<long>(std::ceil(ax * 4.0 / (2.0 * M_PI))) + 64;
    auto integrand = [&](double t) { return std::cos(t * ax) * f(t); };
    return detail::composite_gl(integrand, 0.0, 1.0, panels, gl) / M_PI;
}

}  // namespace deconv

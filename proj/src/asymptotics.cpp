#include "deconv/asymptotics.hpp"

#include <cmath>
#include <stdexcept>

#include "deconv/errors.hpp"

namespace deconv {

void TailProfile::validate() const {
    if (!(alpha > 0.0)) throw std::invalid_argument("alpha must be positive");
    if (!(beta >= 0.0)) throw std::invalid_argument("beta must be nonnegative");
    if (!std::isfinite(a) || !std::isfinite(b) || !std::isfinite(z) || z == 0.0)
        throw std::invalid_argument("tail constants must be finite, z nonzero");
}

RateBundle rates(double alpha, double beta, std::size_t n, double C, std::optional<double> q) {
    if (!(alpha > 0.0)) throw std::invalid_argument("alpha must be positive");
    if (!(beta >= 0.0)) throw std::invalid_argument("beta must be nonnegative");
    if (n < 2) throw std::invalid_argument("n must be >= 2");
    RateBundle out;
    const double nd = static_cast<double>(n);
    if (alpha < 0.5) {
        out.rho1 = out.rho2 = out.rho3 = out.rho4 = 1.0 / nd;
        out.h1 = out.h2 = out.h3 = 0.0;
        out.ell = 1.0;
        return out;
    }
    out.ell = (alpha == 0.5) ? std::log(nd) : 1.0;
    const double ratio = out.ell / nd;
    auto rho = [&](int j) {
        return std::pow(ratio, (2.0 * beta + j - 1.0) / (2.0 * alpha + 2.0 * beta + j - 2.0));
    };
    auto hj = [&](int j) { return C * std::pow(ratio, 1.0 / (2.0 * alpha + 2.0 * beta + j - 2.0)); };
    out.rho1 = rho(1);
    out.rho2 = rho(2);
    out.rho3 = rho(3);
    out.h1 = hj(1);
    out.h2 = hj(2);
    out.h3 = hj(3);
    if (q) out.rho4 = std::pow(nd, -(2.0 * beta + 2.0 * (*q)) / (2.0 * alpha + 2.0 * beta - 1.0));
    return out;
}

double bias_b1(const Kernel& kernel, const TailProfile& profile) {
    profile.validate();
    double acc = 0.0;
    for (int j = 1; j <= kernel.s; ++j) {
        const double denom = static_cast<double>(kernel.r) * j - profile.beta;
        if (denom == 0.0)
            throw PoleError("B1 has a pole: r j = beta at j = " + std::to_string(j));
        double binom = 1.0;
        for (int i = 1; i <= j; ++i) binom *= static_cast<double>(kernel.s - i + 1) / i;
        acc += binom * (j % 2 == 0 ? 1.0 : -1.0) / denom;
    }
    return -profile.b / (2.0 * M_PI) * acc;
}

double bias_b2(double h, double x, const TailProfile& profile) {
    profile.validate();
    if (x == 0.0) throw std::domain_error("B2 is undefined at x = 0 (B1 applies there)");
    if (!(h > 0.0)) throw std::domain_error("B2 requires h > 0");
    return -(profile.a * std::cos(x / h) + profile.b * std::sin(x / h)) / (2.0 * M_PI * x);
}

double variance_v(double x, const TailProfile& profile, const Kernel& kernel, double fx,
                  const QuadratureSpec& spec) {
    profile.validate();
    if (!(fx >= 0.0)) throw std::invalid_argument("fx must be nonnegative");
    if (!(profile.alpha > 0.5))
        throw DivergentIntegralError("V(x) outer integral diverges for alpha <= 1/2");
    if (fx == 0.0) return 0.0;
    (void)x;

    auto g = [&](double t) { return kft(kernel, t) * std::pow(t, profile.alpha); };
    auto inner = [&](double u) { return sine_integral(g, u, 1.0, spec); };

    // outer integral: doubling blocks of int [U, 2U] inner(u)^2 du until
    // the last block is a < 1e-3 relative contribution
    QuadratureSpec outer_spec = spec;
    outer_spec.rel_tol = std::max(spec.rel_tol, 1e-6);
    auto inner_sq = [&](double u) {
        const double v = inner(u);
        return v * v;
    };
    double total = detail::oscillatory_panels(inner_sq, 1.0, 0.0, 16.0, outer_spec);
    double lo = 16.0;
    for (int k = 0; k < 40; ++k) {
        const double hi = 2.0 * lo;
        const double block = detail::oscillatory_panels(inner_sq, 1.0, lo, hi, outer_spec);
        total += block;
        if (std::abs(block) < 1e-3 * std::abs(total)) break;
        if (k == 39) throw QuadratureError("V(x) outer integral did not converge", total, block);
        lo = hi;
    }
    // the symmetric-fold factor 2: the u integral runs over both half-lines
    return 2.0 * profile.z * profile.z * fx * total / (M_PI * M_PI);
}

double fx_density(const TargetModel& target, const ErrorModel& error, double x,
                  const QuadratureSpec& spec) {
    if (error.kind() == ErrorModel::Kind::NoError) return target.density(x);
    // int f_W(x - y) f_delta(y) dy; the error density may have an
    // integrable singularity or kink at y = 0, so split there and use
    // geometric panels toward it.
    auto f = [&](double y) { return target.density(x - y) * error.density(y); };
    const double spread = 40.0 + 8.0 * std::sqrt(error.variance());
    auto side = [&](double sgn) {
        auto fs = [&](double y) { return f(sgn * y); };
        double acc = geometric_blocks(fs, 1e-10, 1.0, spec, 60);
        acc += geometric_blocks(fs, 1.0, spread, spec, 60);
        return acc;
    };
    return side(1.0) + side(-1.0);
}

}  // namespace deconv

#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "deconv/errors.hpp"

namespace deconv {

//! Tolerances and resolution knobs for the oscillatory quadrature engine.
struct QuadratureSpec {
    double rel_tol = 1e-8;
    double abs_tol = 1e-10;
    int panels_per_period = 4;
    int gauss_points_per_panel = 16;
    double t_max_zero_bandwidth = 1e6;

    void validate() const {
        if (!(rel_tol > 0.0) || !(abs_tol > 0.0)) throw std::invalid_argument("tolerances must be positive");
        if (panels_per_period < 2) throw std::invalid_argument("panels_per_period must be >= 2");
        if (gauss_points_per_panel < 2) throw std::invalid_argument("gauss_points_per_panel must be >= 2");
        if (!(t_max_zero_bandwidth > 0.0)) throw std::invalid_argument("t_max_zero_bandwidth must be positive");
    }
};

//! Gauss–Legendre nodes/weights on [-1, 1], cached per order.
class GaussLegendre {
public:
    static const GaussLegendre& rule(int n);

    int size() const { return static_cast<int>(x_.size()); }
    const std::vector<double>& nodes() const { return x_; }
    const std::vector<double>& weights() const { return w_; }

    template <class F>
    double integrate(F&& f, double a, double b) const {
        const double c = 0.5 * (a + b), h = 0.5 * (b - a);
        double acc = 0.0;
        for (std::size_t i = 0; i < x_.size(); ++i) acc += w_[i] * f(c + h * x_[i]);
        return acc * h;
    }

private:
    explicit GaussLegendre(int n);
    std::vector<double> x_, w_;
};

namespace detail {

//! Composite Gauss–Legendre over [a, b] with `panels` equal panels.
template <class F>
double composite_gl(F&& f, double a, double b, long panels, const GaussLegendre& gl) {
    const double w = (b - a) / static_cast<double>(panels);
    double acc = 0.0, comp = 0.0;  // Kahan
    for (long p = 0; p < panels; ++p) {
        const double pa = a + w * static_cast<double>(p);
        const double term = gl.integrate(f, pa, pa + w);
        const double y = term - comp;
        const double t = acc + y;
        comp = (t - acc) - y;
        acc = t;
    }
    return acc;
}

//! Composite GL with panel width tuned to an oscillation frequency:
//! width = min((b-a)/min_div, pi/(freq * panels_per_period)), refined by
//! halving until two passes agree within tolerance.
template <class F>
double oscillatory_panels(F&& f, double freq, double a, double b, const QuadratureSpec& spec,
                          long min_div = 8) {
    const GaussLegendre& gl = GaussLegendre::rule(spec.gauss_points_per_panel);
    double width = (b - a) / static_cast<double>(min_div);
    if (freq > 0.0) width = std::min(width, M_PI / (freq * spec.panels_per_period));
    long panels = std::max<long>(min_div, static_cast<long>(std::ceil((b - a) / width)));

    double prev = composite_gl(f, a, b, panels, gl);
    for (int pass = 0; pass < 12; ++pass) {
        panels *= 2;
        const double cur = composite_gl(f, a, b, panels, gl);
        if (std::abs(cur - prev) <= std::max(spec.rel_tol * std::abs(cur), spec.abs_tol)) return cur;
        prev = cur;
    }
    const double last = composite_gl(f, a, b, panels * 2, gl);
    if (std::abs(last - prev) <= std::max(10.0 * spec.rel_tol * std::abs(last), spec.abs_tol)) return last;
    throw QuadratureError("oscillatory quadrature did not stabilize", prev, last);
}

//! Accelerated value of the alternating half-lobe series
//!     int_a^inf psi(t) dt,  psi(t) = sin(t u) * m(t),  u > 0,
//! for envelopes m that decay (eventually monotonically) to zero. Sums
//! lobes between consecutive zeros of sin(t u) and accelerates the
//! alternating series by iterated averaging of partial sums.
template <class M>
double alternating_lobe_tail(M&& m, double u, double a, const QuadratureSpec& spec) {
    const GaussLegendre& gl = GaussLegendre::rule(spec.gauss_points_per_panel);
    const double half = M_PI / u;
    auto psi = [&](double t) { return std::sin(t * u) * m(t); };

    const double z0 = std::ceil(a / half) * half;
    double head = (z0 > a) ? gl.integrate(psi, a, z0) : 0.0;

    int terms = 48;
    double prev_accel = 0.0;
    for (int attempt = 0; attempt < 3; ++attempt, terms *= 2) {
        std::vector<double> s(static_cast<std::size_t>(terms));
        double run = 0.0;
        for (int k = 0; k < terms; ++k) {
            const double lo = z0 + half * k;
            run += gl.integrate(psi, lo, lo + half);
            s[static_cast<std::size_t>(k)] = run;
        }
        for (int lev = 1; lev < terms; ++lev)
            for (int i = 0; i + lev < terms; ++i) s[static_cast<std::size_t>(i)] =
                0.5 * (s[static_cast<std::size_t>(i)] + s[static_cast<std::size_t>(i) + 1]);
        const double accel = s[0];
        if (attempt > 0 &&
            std::abs(accel - prev_accel) <= std::max(spec.rel_tol * std::abs(accel), spec.abs_tol))
            return head + accel;
        prev_accel = accel;
    }
    // Final pair disagreed; report what we have.
    throw QuadratureError("alternating lobe series did not stabilize", prev_accel, prev_accel);
}

}  // namespace detail

//! int_0^T [sin(t u)/t] g(t) dt, with the integrand extended continuously
//! to t = 0 (value u * g(0)). For moderate oscillation counts this is
//! direct period-resolved composite Gauss–Legendre with a refinement
//! check; for very long ranges (the h = 0 weight evaluations) the tail is
//! evaluated as a difference of two accelerated alternating lobe series,
//! so the result is still the truncated integral over [0, T].
template <class G>
double sine_integral(G&& g, double u, double T, const QuadratureSpec& spec) {
    if (u == 0.0 || T <= 0.0) return 0.0;
    const double sign = (u < 0.0) ? -1.0 : 1.0;
    const double au = std::abs(u);

    auto integrand = [&](double t) {
        const double tu = t * au;
        if (std::abs(tu) < 1e-8) return au * (1.0 - tu * tu / 6.0) * g(t);
        return std::sin(tu) / t * g(t);
    };

    const double half_periods = T * au / M_PI;
    constexpr double kDirectLimit = 4096.0;
    if (half_periods <= kDirectLimit) {
        return sign * detail::oscillatory_panels(integrand, au, 0.0, T, spec);
    }

    // Head by direct panels, then truncated tail = S(T0) - S(T) with
    // S(a) = int_a^inf, each via the accelerated alternating series.
    const double T0 = 64.0 * M_PI / au;
    const double head = detail::oscillatory_panels(integrand, au, 0.0, T0, spec);
    auto envelope = [&](double t) { return g(t) / t; };
    const double tail_from_T0 = detail::alternating_lobe_tail(envelope, au, T0, spec);
    const double tail_from_T = detail::alternating_lobe_tail(envelope, au, T, spec);
    return sign * (head + tail_from_T0 - tail_from_T);
}

//! int_a^b cos(omega t) f(t) dt with period-resolved panels and refinement.
template <class F>
double cosine_integral(F&& f, double omega, double a, double b, const QuadratureSpec& spec) {
    if (b <= a) return 0.0;
    const double ao = std::abs(omega);
    auto integrand = [&](double t) { return std::cos(ao * t) * f(t); };
    return detail::oscillatory_panels(integrand, ao, a, b, spec);
}

//! Non-oscillatory adaptive helper: geometric blocks [lo*2^k, lo*2^{k+1}]
//! integrated until the running block contribution falls below tolerance
//! or `hi` is reached. Throws DivergentIntegralError if blocks grow.
template <class F>
double geometric_blocks(F&& f, double lo, double hi, const QuadratureSpec& spec, int max_blocks = 80) {
    const GaussLegendre& gl = GaussLegendre::rule(32);
    double total = 0.0, a = lo;
    double prev_block = 0.0;
    for (int k = 0; k < max_blocks && a < hi; ++k) {
        const double b = std::min(hi, a * 2.0);
        const double block = detail::composite_gl(f, a, b, 4, gl);
        total += block;
        if (k > 4 && std::abs(block) > 4.0 * std::abs(prev_block) && std::abs(block) > 1e6)
            throw DivergentIntegralError("geometric block integral appears divergent");
        if (b >= hi) return total;
        if (k > 2 && std::abs(block) <= std::max(spec.rel_tol * std::abs(total), spec.abs_tol) &&
            std::abs(block) <= std::abs(prev_block))
            return total;
        prev_block = block;
        a = b;
    }
    return total;
}

}  // namespace deconv

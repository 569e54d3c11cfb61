#include "deconv/bandwidth.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "deconv/errors.hpp"
#include "deconv/estimators.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace deconv {

void MisePlan::validate() const {
    if (kappa2(kernel) == 0.0)
        throw std::invalid_argument(
            "bandwidth selection requires kappa2 != 0; use an r = 2 kernel");
    if (!(h_min > 0.0) || !(h_max > h_min)) throw std::invalid_argument("bad bandwidth bracket");
    if (n < 2) throw std::invalid_argument("n must be >= 2");
    if (resolution < 4) throw std::invalid_argument("resolution must be >= 4");
    if (roughness == RoughnessSource::Exact && target == nullptr)
        throw std::invalid_argument("exact roughness needs a target model");
    if (roughness != RoughnessSource::Exact && data.size() < 2)
        throw std::invalid_argument("data-driven roughness needs data");
    spec.validate();
}

double mise_I(const ErrorModel& error, const Kernel& kernel, double h, const QuadratureSpec& spec) {
    if (h < 0.0) throw UnsupportedBandwidthError("h must be nonnegative");
    auto bracket = [&](double t) {
        const double v = 1.0 - kft(kernel, h * t) / error.cf(t);
        return v * v / (t * t);
    };
    if (h == 0.0) {
        if (error.kind() == ErrorModel::Kind::NoError) return 0.0;
        if (smoothness_class(error).verdict != SmoothnessVerdict::Feasible)
            throw DivergentIntegralError("I(0) diverges: error law is not root-n feasible");
        auto tail_integrand = [&](double t) {
            const double v = 1.0 - 1.0 / error.cf(t);
            return v * v / (t * t);
        };
        // [t0, 1]: smooth; [1, inf): geometric blocks, convergent by feasibility.
        const GaussLegendre& gl = GaussLegendre::rule(32);
        const double low = detail::composite_gl(tail_integrand, 1e-6, 1.0, 64, gl);
        const double high = geometric_blocks(tail_integrand, 1.0, 1e18, spec, 120);
        return (low + high) / M_PI;
    }

    const double T = 1.0 / h;
    const GaussLegendre& gl = GaussLegendre::rule(32);
    // The integrand vanishes like t^2 at the origin ([0, 1e-6] contributes
    // O(1e-18)), is smooth on [t0, T/2], and can peak sharply against the
    // kernel roll-off on [T/2, T]; beyond T it is exactly t^-2.
    auto integrate_half = [&](int mult) {
        const double mid = 0.5 * T;
        const double low = detail::composite_gl(bracket, 1e-6, std::min(1.0, mid), 32 * mult, gl);
        double body = 0.0;
        if (mid > 1.0) body = geometric_blocks(bracket, 1.0, mid, spec, 80);
        const double peak = detail::composite_gl(bracket, mid, T, 64 * mult, gl);
        return low + body + peak;
    };
    double coarse = integrate_half(1);
    double fine = integrate_half(2);
    if (std::abs(fine - coarse) > std::max(100.0 * spec.rel_tol * std::abs(fine), spec.abs_tol)) {
        coarse = fine;
        fine = integrate_half(4);
        if (std::abs(fine - coarse) > std::max(1000.0 * spec.rel_tol * std::abs(fine), spec.abs_tol))
            throw QuadratureError("I(h) quadrature did not stabilize", coarse, fine);
    }
    return (fine + h) / M_PI;  // exact tail: int_T^inf t^-2 dt = h
}

double a_delta(const ErrorModel& error, const Kernel& kernel, const QuadratureSpec& spec) {
    const double alpha = error.tail_exponent();
    if (!(alpha > 0.5))
        throw NoAsymptoteError("I(h) has no h^{1-2alpha} asymptote for alpha <= 1/2 (I(0) is finite)");
    const double C = error.tail_constant();
    auto integrand = [&](double t) {
        const double k = kft(kernel, t);
        return std::pow(t, 2.0 * alpha - 2.0) * k * k;
    };
    const GaussLegendre& gl = GaussLegendre::rule(48);
    const double kappa = detail::composite_gl(integrand, 0.0, 1.0, 64, gl);
    (void)spec;
    return kappa / (M_PI * C * C);
}

double estimate_sigma_w(std::span<const double> data, const ErrorModel& error) {
    if (data.size() < 2) throw std::invalid_argument("need at least two observations");
    double mean = 0.0;
    for (double x : data) mean += x;
    mean /= static_cast<double>(data.size());
    double ss = 0.0;
    for (double x : data) ss += (x - mean) * (x - mean);
    const double var_x = ss / static_cast<double>(data.size() - 1);
    const double var_w = var_x - error.even_moment(1);
    if (!(var_w > 0.0))
        throw NoiseDominatesError("sample variance does not exceed the error variance");
    return std::sqrt(var_w);
}

double normal_reference_roughness(double sigma_w) {
    return 1.0 / (4.0 * std::sqrt(M_PI) * sigma_w * sigma_w * sigma_w);
}

BandwidthResult select_bandwidth(const MisePlan& plan) {
    plan.validate();

    double rough = 0.0;
    switch (plan.roughness) {
        case RoughnessSource::Exact:
            rough = target_roughness(*plan.target);
            break;
        case RoughnessSource::NormalReference:
            rough = normal_reference_roughness(estimate_sigma_w(plan.data, plan.error));
            break;
        case RoughnessSource::OneStep:
            rough = one_step_roughness(plan.data, plan.error, plan.kernel, plan.spec);
            break;
    }

    const double k2 = kappa2(plan.kernel);
    const double bias_coeff = 0.25 * k2 * k2 * rough;
    const double inv_n = 1.0 / static_cast<double>(plan.n);
    auto M = [&](double h) {
        return inv_n * mise_I(plan.error, plan.kernel, h, plan.spec) + bias_coeff * h * h * h * h;
    };

    BandwidthResult out;
    out.roughness = rough;
    out.curve.resize(plan.resolution);
    const double lr = std::log(plan.h_min), ur = std::log(plan.h_max);
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic)
#endif
    for (long i = 0; i < static_cast<long>(plan.resolution); ++i) {
        const double h = std::exp(lr + (ur - lr) * static_cast<double>(i) /
                                           static_cast<double>(plan.resolution - 1));
        out.curve[static_cast<std::size_t>(i)] = {h, M(h)};
    }
    std::size_t best = 0;
    for (std::size_t i = 1; i < out.curve.size(); ++i)
        if (out.curve[i].second < out.curve[best].second) best = i;

    // golden-section refinement inside the bracketing neighbours
    double a = out.curve[best == 0 ? 0 : best - 1].first;
    double b = out.curve[std::min(best + 1, out.curve.size() - 1)].first;
    const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
    double c = b - gr * (b - a), d = a + gr * (b - a);
    double fc = M(c), fd = M(d);
    while (b - a > 1e-4) {
        if (fc < fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - gr * (b - a);
            fc = M(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + gr * (b - a);
            fd = M(d);
        }
    }
    out.h_opt = 0.5 * (a + b);
    out.mise_min = M(out.h_opt);
    return out;
}

double one_step_roughness(std::span<const double> data, const ErrorModel& error,
                          const Kernel& kernel, const QuadratureSpec& spec) {
    // stage 1: normal-reference pilot bandwidth
    MisePlan pilot;
    pilot.error = error;
    pilot.kernel = kernel;
    pilot.n = data.size();
    pilot.roughness = RoughnessSource::NormalReference;
    pilot.data = data;
    pilot.spec = spec;
    const double h0 = select_bandwidth(pilot).h_opt;

    // stage 2: roughness of the estimated density derivative over the
    // standard span, Simpson on a fixed 1025-point grid
    const auto [mn, mx] = std::minmax_element(data.begin(), data.end());
    const double lo = *mn - 10.0 * (h0 + 1.0), hi = *mx + 10.0 * (h0 + 1.0);
    WeightContext ctx(kernel, error, h0, spec);
    const double xmax = std::max(std::abs(lo), std::abs(hi));
    EcfEvaluator ecf(data, ctx, xmax);

    constexpr std::size_t kPoints = 1025;  // odd, Simpson-ready
    const double step = (hi - lo) / static_cast<double>(kPoints - 1);
    double acc = 0.0;
    for (std::size_t i = 0; i < kPoints; ++i) {
        const double d = ecf.density_deriv(lo + step * static_cast<double>(i));
        const double w = (i == 0 || i == kPoints - 1) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
        acc += w * d * d;
    }
    return acc * step / 3.0;
}

}  // namespace deconv

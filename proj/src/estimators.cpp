#include "deconv/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "deconv/errors.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace deconv {

namespace {

double factorial(int n) {
    double f = 1.0;
    for (int i = 2; i <= n; ++i) f *= i;
    return f;
}

double binom(int n, int k) {
    double b = 1.0;
    for (int j = 1; j <= k; ++j) b *= static_cast<double>(n - j + 1) / static_cast<double>(j);
    return b;
}

//! Taylor coefficients (powers t^0..t^N) of Psi_h(t) = K^Ft(ht) / f^Ft(t).
std::vector<double> psi_series(const Kernel& k, const ErrorModel& error, double h, int N) {
    std::vector<double> fc(static_cast<std::size_t>(N) + 1, 0.0);  // f^Ft coefficients
    fc[0] = 1.0;
    for (int m = 1; 2 * m <= N; ++m)
        fc[static_cast<std::size_t>(2 * m)] =
            (m % 2 == 0 ? 1.0 : -1.0) * error.even_moment(m) / factorial(2 * m);
    std::vector<double> gc(fc.size(), 0.0);  // reciprocal series
    gc[0] = 1.0;
    for (int i = 1; i <= N; ++i) {
        double acc = 0.0;
        for (int j = 1; j <= i; ++j) acc += fc[static_cast<std::size_t>(j)] * gc[static_cast<std::size_t>(i - j)];
        gc[static_cast<std::size_t>(i)] = -acc;
    }
    std::vector<double> kc(fc.size(), 0.0);  // K^Ft(h t) coefficients
    for (int j = 0; j <= k.s; ++j) {
        const int pow = k.r * j;
        if (pow > N) break;
        kc[static_cast<std::size_t>(pow)] = binom(k.s, j) * (j % 2 == 0 ? 1.0 : -1.0) * std::pow(h, pow);
    }
    std::vector<double> pc(fc.size(), 0.0);
    for (int i = 0; i <= N; ++i) {
        double acc = 0.0;
        for (int j = 0; j <= i; ++j) acc += kc[static_cast<std::size_t>(j)] * gc[static_cast<std::size_t>(i - j)];
        pc[static_cast<std::size_t>(i)] = acc;
    }
    return pc;
}

//! Even moments M_{2m} = int u^{2m} dF-hat, m = 0..mmax, via the Taylor
//! coefficients of phi_X-hat(t) * Psi_h(t) at t = 0:
//! M_{2m} = (2m)! sum_{b even} (-1)^{b/2} mu-bar_{2m-b} / (2m-b)! * Psi_b.
std::vector<double> fhat_even_moments(std::span<const double> data, const Kernel& k,
                                      const ErrorModel& error, double h, int mmax) {
    const int N = 2 * mmax;
    const auto psi = psi_series(k, error, h, N);
    std::vector<double> mu(static_cast<std::size_t>(N) + 1, 0.0);  // data power means
    mu[0] = 1.0;
    for (int p = 1; p <= N; ++p) {
        double acc = 0.0, comp = 0.0;
        for (double x : data) {
            const double term = std::pow(x, p);
            const double y = term - comp;
            const double t = acc + y;
            comp = (t - acc) - y;
            acc = t;
        }
        mu[static_cast<std::size_t>(p)] = acc / static_cast<double>(data.size());
    }
    std::vector<double> M(static_cast<std::size_t>(mmax) + 1, 0.0);
    for (int m = 0; m <= mmax; ++m) {
        double acc = 0.0;
        for (int b = 0; b <= 2 * m; b += 2) {
            const double sign = (b / 2) % 2 == 0 ? 1.0 : -1.0;
            acc += sign * mu[static_cast<std::size_t>(2 * m - b)] / factorial(2 * m - b) *
                   psi[static_cast<std::size_t>(b)];
        }
        M[static_cast<std::size_t>(m)] = factorial(2 * m) * acc;
    }
    return M;
}

//! int_S^inf s^{-1-q} cos(s) ds via the accelerated alternating lobe
//! series (cos s = sin(s + pi/2)).
double cos_power_tail(double q, double S, const QuadratureSpec& spec) {
    auto m = [&](double tau) { return std::pow(tau - 0.5 * M_PI, -1.0 - q); };
    return detail::alternating_lobe_tail(m, 1.0, S + 0.5 * M_PI, spec);
}

//! Phi(q, k) = int_0^inf s^{-1-q} (cos s - sum_{j<=k} (-1)^j s^{2j}/(2j)!) ds,
//! the scale constant with  int_0^inf t^{-1-q}(cos(t x) - poly) dt = |x|^q Phi.
double phi_constant(double q, int k, const QuadratureSpec& spec) {
    // [0, 1]: term-by-term integration of the remainder series.
    double head = 0.0;
    for (int j = k + 1; j <= k + 40; ++j) {
        const double sign = j % 2 == 0 ? 1.0 : -1.0;
        head += sign / (factorial(2 * j) * (2.0 * j - q));
    }
    // [1, inf): cosine part by lobe acceleration, polynomial part analytic.
    double poly = 0.0;
    for (int j = 0; j <= k; ++j) {
        const double sign = j % 2 == 0 ? 1.0 : -1.0;
        poly += sign / (factorial(2 * j) * (q - 2.0 * j));
    }
    return head + cos_power_tail(q, 1.0, spec) - poly;
}

}  // namespace

DeconvFit::DeconvFit(std::vector<double> data, WeightContext ctx)
    : data_(std::move(data)), ctx_(std::move(ctx)) {
    if (data_.empty()) throw std::invalid_argument("DeconvFit requires at least one observation");
    for (double x : data_)
        if (!std::isfinite(x)) throw std::invalid_argument("DeconvFit data must be finite");
    auto [mn, mx] = std::minmax_element(data_.begin(), data_.end());
    min_x_ = *mn;
    max_x_ = *mx;
}

double DeconvFit::span_lo() const { return min_x_ - 10.0 * (ctx_.h() + 1.0); }
double DeconvFit::span_hi() const { return max_x_ + 10.0 * (ctx_.h() + 1.0); }

void DeconvFit::attach_cache(double u_abs_max) {
    cache_ = std::make_shared<L1Table>(ctx_, u_abs_max);
}

double cdf_at(const DeconvFit& fit, double x) {
    const auto& data = fit.data();
    double acc = 0.0, comp = 0.0;
    if (const L1Table* table = fit.cache()) {
        for (double xj : data) {
            const double term = (*table)(x - xj);
            const double y = term - comp;
            const double t = acc + y;
            comp = (t - acc) - y;
            acc = t;
        }
    } else {
        for (double xj : data) {
            const double term = l1_weight(fit.ctx(), x - xj);
            const double y = term - comp;
            const double t = acc + y;
            comp = (t - acc) - y;
            acc = t;
        }
    }
    return acc / static_cast<double>(data.size());
}

double density_at(const DeconvFit& fit, double x) {
    const double h = fit.ctx().h();
    if (h <= 0.0) throw UnsupportedBandwidthError("density estimate requires h > 0");
    const auto& data = fit.data();
    double acc = 0.0, comp = 0.0;
    for (double xj : data) {
        const double term = l_weight(fit.ctx(), (x - xj) / h);
        const double y = term - comp;
        const double t = acc + y;
        comp = (t - acc) - y;
        acc = t;
    }
    return acc / (static_cast<double>(data.size()) * h);
}

namespace {

CdfCurve evaluate_curve_impl(const DeconvFit& fit, std::span<const double> grid, bool parallel) {
    for (std::size_t i = 1; i < grid.size(); ++i)
        if (!(grid[i] > grid[i - 1])) throw std::invalid_argument("grid must be strictly increasing");
    CdfCurve out;
    out.grid.assign(grid.begin(), grid.end());
    out.values.assign(grid.size(), 0.0);
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic, 16) if (parallel)
#endif
    for (long i = 0; i < static_cast<long>(grid.size()); ++i)
        out.values[static_cast<std::size_t>(i)] = cdf_at(fit, grid[static_cast<std::size_t>(i)]);
    (void)parallel;
    return out;
}

}  // namespace

CdfCurve evaluate_curve(const DeconvFit& fit, std::span<const double> grid) {
    return evaluate_curve_impl(fit, grid, true);
}

CdfCurve evaluate_curve_serial(const DeconvFit& fit, std::span<const double> grid) {
    return evaluate_curve_impl(fit, grid, false);
}

CdfCurve monotonize(const CdfCurve& curve) {
    CdfCurve out = curve;
    double running = -std::numeric_limits<double>::infinity();
    for (auto& v : out.values) {
        running = std::max(running, v);
        v = running;
    }
    out.monotonized = true;
    return out;
}

std::vector<double> default_grid(const DeconvFit& fit, std::size_t points) {
    std::vector<double> g(points);
    const double lo = fit.span_lo(), hi = fit.span_hi();
    for (std::size_t i = 0; i < points; ++i)
        g[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(points - 1);
    return g;
}

double quantile(const DeconvFit& fit, double u, const QuantileOptions& opts) {
    if (!(u > 0.0 && u < 1.0)) throw std::domain_error("quantile level must lie in (0, 1)");
    const double lo = opts.span_hi > opts.span_lo ? opts.span_lo : fit.span_lo();
    const double hi = opts.span_hi > opts.span_lo ? opts.span_hi : fit.span_hi();
    std::vector<double> g(opts.grid_points);
    for (std::size_t i = 0; i < g.size(); ++i)
        g[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(g.size() - 1);
    const CdfCurve mono = monotonize(evaluate_curve(fit, g));
    const double tol = 1e-6 * (hi - lo);
    return quantile_from_curve(mono, u, [&](double y) { return cdf_at(fit, y); }, tol);
}

double poly_moment(std::span<const double> data, const ErrorModel& error, int r) {
    if (r < 1) throw std::invalid_argument("moment order must be >= 1");
    if (data.empty()) throw std::invalid_argument("empty data");
    std::vector<double> mu(static_cast<std::size_t>(r) + 1, 0.0);
    mu[0] = 1.0;
    for (int k = 1; k <= r; ++k) {
        double acc = 0.0, comp = 0.0;
        for (double x : data) {
            const double term = std::pow(x, k);
            const double y = term - comp;
            const double t = acc + y;
            comp = (t - acc) - y;
            acc = t;
        }
        double moment = acc / static_cast<double>(data.size());
        for (int j = 2; j <= k; j += 2)
            moment -= binom(k, j) * error.even_moment(j / 2) * mu[static_cast<std::size_t>(k - j)];
        mu[static_cast<std::size_t>(k)] = moment;
    }
    return mu[static_cast<std::size_t>(r)];
}

AbsMomentEvaluator::AbsMomentEvaluator(const DeconvFit& fit) : fit_(fit) {
    const WeightContext& ctx = fit.ctx();
    if (ctx.h() <= 0.0) return;  // h = 0 handled by the adaptive scalar path

    const QuadratureSpec& spec = ctx.spec();
    const auto& data = fit.data();
    const double n = static_cast<double>(data.size());
    const double T = ctx.upper_limit();

    double mean = 0.0;
    for (double x : data) mean += x;
    mean /= n;
    double ss = 0.0;
    for (double x : data) {
        ss += (x - mean) * (x - mean);
        x_abs_max_ = std::max(x_abs_max_, std::abs(x));
    }
    const double sd = std::sqrt(ss / n + mean * mean);  // scale of sqrt(E X^2)
    t0_ = std::min(0.01 / std::max(sd, 1e-3), T / 16.0);

    auto build = [&](int refine, std::vector<double>& ts, std::vector<double>& ws,
                     std::vector<double>& cpsi) {
        const GaussLegendre& gl = GaussLegendre::rule(spec.gauss_points_per_panel);
        const int gn = gl.size();
        double a = t0_;
        while (a < T) {
            const double b = std::min(T, 2.0 * a);
            double width = std::min((b - a) / 8.0,
                                    M_PI / (std::max(x_abs_max_, 1e-6) * spec.panels_per_period));
            long panels = std::max<long>(8, static_cast<long>(std::ceil((b - a) / width))) * refine;
            const double pw = (b - a) / static_cast<double>(panels);
            for (long p = 0; p < panels; ++p) {
                const double c = a + pw * (static_cast<double>(p) + 0.5), hw = 0.5 * pw;
                for (int i = 0; i < gn; ++i) {
                    const double t = c + hw * gl.nodes()[static_cast<std::size_t>(i)];
                    double cs = 0.0;
                    for (double x : data) cs += std::cos(t * x);
                    ts.push_back(t);
                    ws.push_back(hw * gl.weights()[static_cast<std::size_t>(i)]);
                    cpsi.push_back(cs / n * ctx.psi(t));
                }
            }
            a = b;
        }
    };
    build(1, t_coarse_, w_coarse_, cpsi_coarse_);
    build(2, t_fine_, w_fine_, cpsi_fine_);
    tabulated_ = true;
}

double AbsMomentEvaluator::operator()(double q) const {
    if (!(q > 0.0)) throw std::domain_error("q must be positive");
    const WeightContext& ctx = fit_.ctx();
    const Kernel& kern = ctx.kernel();
    if (!(static_cast<double>(kern.r) > q + 1.0))
        throw NonIntegrableTailError(
            "kernel tail decays too slowly for |u|^q integration: need r > q + 1");
    if (ctx.zero_bandwidth() && ctx.error().kind() != ErrorModel::Kind::NoError) {
        const auto rep = smoothness_class(ctx.error(), q);
        if (rep.verdict != SmoothnessVerdict::Feasible)
            throw UnsupportedBandwidthError(
                "h = 0 absolute moments require moment-mode feasibility of the error law");
    }

    const QuadratureSpec& spec = ctx.spec();
    const auto& data = fit_.data();
    const double n = static_cast<double>(data.size());

    // Even integer q: the principal-value Stieltjes integral equals the
    // exact derivative of the measure's characteristic function at zero.
    const double rounded = std::round(q);
    if (std::abs(q - rounded) < 1e-9 && static_cast<long long>(rounded) % 2 == 0) {
        const int m = static_cast<int>(rounded) / 2;
        return fhat_even_moments(data, kern, ctx.error(), ctx.h(), m)[static_cast<std::size_t>(m)];
    }

    const int k = static_cast<int>(std::floor(q / 2.0));
    const double Phi = phi_constant(q, k, spec);
    const auto M = fhat_even_moments(data, kern, ctx.error(), ctx.h(), k + 2);
    const double T = ctx.upper_limit();

    auto poly_k = [&](double t) {
        double acc = 0.0, tp = 1.0;
        for (int j = 0; j <= k; ++j) {
            const double sign = j % 2 == 0 ? 1.0 : -1.0;
            acc += sign * M[static_cast<std::size_t>(j)] / factorial(2 * j) * tp;
            tp *= t * t;
        }
        return acc;
    };
    auto poly_tail = [&]() {
        double acc = 0.0;
        for (int j = 0; j <= k; ++j) {
            const double sign = j % 2 == 0 ? 1.0 : -1.0;
            acc -= sign * M[static_cast<std::size_t>(j)] / factorial(2 * j) *
                   std::pow(T, 2.0 * j - q) / (q - 2.0 * j);
        }
        return acc;
    };

    // Fast exact route for the empirical measure (NoError, h = 0): the
    // integral splits per observation, int_0^T t^{-1-q}(cos(t X) - poly)
    // = |X|^q (Phi - tailPhi(T |X|)).
    if (ctx.zero_bandwidth() && ctx.error().kind() == ErrorModel::Kind::NoError) {
        auto tail_phi = [&](double S) {
            double poly = 0.0;
            for (int j = 0; j <= k; ++j) {
                const double sign = j % 2 == 0 ? 1.0 : -1.0;
                poly += sign / factorial(2 * j) * std::pow(S, 2.0 * j - q) / (q - 2.0 * j);
            }
            return cos_power_tail(q, S, spec) - poly;
        };
        double acc = 0.0;
        for (double x : data) {
            const double ax = std::abs(x);
            if (ax == 0.0) continue;
            acc += std::pow(ax, q) * (Phi - tail_phi(T * ax));
        }
        return acc / (n * Phi);
    }

    // Series head on [0, t0]: the first omitted expansion terms, computed
    // analytically to dodge the cancellation between Chat * Psi and the
    // subtracted polynomial near t = 0.
    const double sd = std::sqrt(std::max(M[1], 1e-12));
    const double t0 = tabulated_ ? t0_ : std::min(0.01 / std::max(sd, 1e-3), T / 16.0);
    double head = 0.0;
    {
        const double s1 = (k + 1) % 2 == 0 ? 1.0 : -1.0;
        const double s2 = (k + 2) % 2 == 0 ? 1.0 : -1.0;
        head += s1 * M[static_cast<std::size_t>(k + 1)] / factorial(2 * k + 2) *
                std::pow(t0, 2.0 * (k + 1) - q) / (2.0 * (k + 1) - q);
        head += s2 * M[static_cast<std::size_t>(k + 2)] / factorial(2 * k + 4) *
                std::pow(t0, 2.0 * (k + 2) - q) / (2.0 * (k + 2) - q);
    }

    if (tabulated_) {
        auto quad = [&](const std::vector<double>& ts, const std::vector<double>& ws,
                        const std::vector<double>& cpsi) {
            double acc = 0.0, comp = 0.0;
            for (std::size_t i = 0; i < ts.size(); ++i) {
                const double term = ws[i] * std::pow(ts[i], -1.0 - q) * (cpsi[i] - poly_k(ts[i]));
                const double y = term - comp;
                const double t = acc + y;
                comp = (t - acc) - y;
                acc = t;
            }
            return acc;
        };
        const double coarse = quad(t_coarse_, w_coarse_, cpsi_coarse_);
        const double fine = quad(t_fine_, w_fine_, cpsi_fine_);
        const double nu = (head + fine + poly_tail()) / Phi;
        if (std::abs(fine - coarse) <= std::max(1e4 * spec.rel_tol * std::abs(fine), 1e3 * spec.abs_tol))
            return nu;
        // fall through to the adaptive path below
    }

    // Adaptive route: numeric integral of t^{-1-q} (Chat(t) Psi(t) - P_k(t))
    // over [t0, T] by doubling blocks with oscillation-resolved panels,
    // stopping early once blocks decay below tolerance; the polynomial tail
    // beyond T is analytic.
    auto chat = [&](double t) {
        double acc = 0.0, comp = 0.0;
        for (double x : data) {
            const double term = std::cos(t * x);
            const double y = term - comp;
            const double tt = acc + y;
            comp = (tt - acc) - y;
            acc = tt;
        }
        return acc / n;
    };
    auto integrand = [&](double t) {
        return std::pow(t, -1.0 - q) * (chat(t) * ctx.psi(t) - poly_k(t));
    };
    double xmax = x_abs_max_;
    for (double x : data) xmax = std::max(xmax, std::abs(x));
    double body = 0.0, prev_block = std::numeric_limits<double>::infinity();
    double a = t0;
    while (a < T) {
        const double b = std::min(T, 2.0 * a);
        const double block = detail::oscillatory_panels(integrand, xmax, a, b, spec);
        body += block;
        if (a > 8.0 * t0 && std::abs(block) <= std::abs(prev_block) &&
            std::abs(block) < std::max(spec.rel_tol * std::abs(body), spec.abs_tol) && b < T)
            break;
        prev_block = block;
        a = b;
    }
    return (head + body + poly_tail()) / Phi;
}

double abs_moment(const DeconvFit& fit, double q) { return AbsMomentEvaluator(fit)(q); }

std::vector<double> resample(const DeconvFit& fit, std::size_t m, RngStream& rng) {
    const CdfCurve mono = monotonize(evaluate_curve(fit, default_grid(fit)));
    std::vector<double> v = mono.values;
    for (auto& x : v) x = std::clamp(x, 0.0, 1.0);
    if (!(v.back() > v.front()))
        throw DegenerateDistributionError("monotonized curve is flat over the span");
    std::vector<double> out;
    out.reserve(m);
    for (std::size_t i = 0; i < m; ++i) {
        const double r = v.front() + (v.back() - v.front()) * rng.uniform();
        const auto it = std::lower_bound(v.begin(), v.end(), r);
        std::size_t hi = static_cast<std::size_t>(it - v.begin());
        if (hi == 0) {
            out.push_back(mono.grid.front());
            continue;
        }
        if (hi >= v.size()) hi = v.size() - 1;
        const std::size_t lo = hi - 1;
        const double dv = v[hi] - v[lo];
        const double frac = dv > 0.0 ? (r - v[lo]) / dv : 1.0;
        out.push_back(mono.grid[lo] + frac * (mono.grid[hi] - mono.grid[lo]));
    }
    return out;
}

EcfEvaluator::EcfEvaluator(std::span<const double> data, const WeightContext& ctx, double x_abs_max) {
    if (ctx.h() <= 0.0) throw UnsupportedBandwidthError("EcfEvaluator requires h > 0");
    const QuadratureSpec& spec = ctx.spec();
    const double T = ctx.upper_limit();
    double width = std::min(T / 8.0, M_PI / (std::max(x_abs_max, 1e-6) * spec.panels_per_period));
    long panels = std::max<long>(8, static_cast<long>(std::ceil(T / width)));

    build(data, ctx, x_abs_max, panels);
    for (int attempt = 0; attempt < 4; ++attempt) {
        EcfEvaluator finer;
        finer.build(data, ctx, x_abs_max, panels * 2);
        bool ok = true;
        for (double frac : {-0.9, -0.3, 0.2, 0.6, 1.0}) {
            const double x = frac * x_abs_max;
            if (std::abs(cdf(x) - finer.cdf(x)) >
                std::max(spec.rel_tol * std::abs(finer.cdf(x)), spec.abs_tol)) {
                ok = false;
                break;
            }
        }
        *this = std::move(finer);
        if (ok) return;
        panels *= 2;
    }
    throw QuadratureError("EcfEvaluator quadrature did not stabilize", 0.0, 0.0);
}

void EcfEvaluator::build(std::span<const double> data, const WeightContext& ctx, double, long panels) {
    const QuadratureSpec& spec = ctx.spec();
    const GaussLegendre& gl = GaussLegendre::rule(spec.gauss_points_per_panel);
    const int gn = gl.size();
    const double T = ctx.upper_limit();
    const double pw = T / static_cast<double>(panels);
    const double n = static_cast<double>(data.size());

    const std::size_t total = static_cast<std::size_t>(panels) * static_cast<std::size_t>(gn);
    t_.resize(total);
    wc_.resize(total);
    ws_.resize(total);
    wct_.resize(total);
    wst_.resize(total);

#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
    for (long p = 0; p < panels; ++p) {
        const double c = pw * (static_cast<double>(p) + 0.5), hw = 0.5 * pw;
        for (int i = 0; i < gn; ++i) {
            const std::size_t idx = static_cast<std::size_t>(p) * gn + i;
            const double t = c + hw * gl.nodes()[static_cast<std::size_t>(i)];
            double cs = 0.0, sn = 0.0;
            for (double x : data) {
                cs += std::cos(t * x);
                sn += std::sin(t * x);
            }
            const double w = hw * gl.weights()[static_cast<std::size_t>(i)] * ctx.psi(t);
            t_[idx] = t;
            wc_[idx] = w * cs / n;
            ws_[idx] = w * sn / n;
            wct_[idx] = wc_[idx] / t;
            wst_[idx] = ws_[idx] / t;
        }
    }
}

double EcfEvaluator::cdf(double x) const {
    double acc = 0.0, comp = 0.0;
    for (std::size_t i = 0; i < t_.size(); ++i) {
        const double term = std::sin(t_[i] * x) * wct_[i] - std::cos(t_[i] * x) * wst_[i];
        const double y = term - comp;
        const double t = acc + y;
        comp = (t - acc) - y;
        acc = t;
    }
    return 0.5 + acc / M_PI;
}

double EcfEvaluator::density(double x) const {
    double acc = 0.0;
    for (std::size_t i = 0; i < t_.size(); ++i)
        acc += std::cos(t_[i] * x) * wc_[i] + std::sin(t_[i] * x) * ws_[i];
    return acc / M_PI;
}

double EcfEvaluator::density_deriv(double x) const {
    double acc = 0.0;
    for (std::size_t i = 0; i < t_.size(); ++i)
        acc += t_[i] * (std::cos(t_[i] * x) * ws_[i] - std::sin(t_[i] * x) * wc_[i]);
    return acc / M_PI;
}

}  // namespace deconv

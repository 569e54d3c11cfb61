#include "deconv/simlab.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "deconv/asymptotics.hpp"
#include "deconv/errors.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace deconv {

namespace {

constexpr std::uint64_t kRoleTarget = 0;
constexpr std::uint64_t kRoleError = 1;

struct KahanAcc {
    double sum = 0.0, comp = 0.0;
    void add(double x) {
        const double y = x - comp;
        const double t = sum + y;
        comp = (t - sum) - y;
        sum = t;
    }
};

//! Fixed-run-order reduction of one cell; NaN entries count as failures.
CellStats reduce_cell(const std::vector<double>& values, std::size_t runs, std::size_t stride,
                      std::size_t offset, double truth) {
    CellStats out;
    KahanAcc mean_acc;
    std::size_t good = 0;
    for (std::size_t r = 0; r < runs; ++r) {
        const double v = values[r * stride + offset];
        if (std::isnan(v)) {
            ++out.failures;
            continue;
        }
        mean_acc.add(v);
        ++good;
    }
    if (good == 0) {
        out.mean = out.bias = out.variance = out.mse = out.mc_se =
            std::numeric_limits<double>::quiet_NaN();
        return out;
    }
    out.mean = mean_acc.sum / static_cast<double>(good);
    KahanAcc var_acc, mse_sq_acc;
    for (std::size_t r = 0; r < runs; ++r) {
        const double v = values[r * stride + offset];
        if (std::isnan(v)) continue;
        var_acc.add((v - out.mean) * (v - out.mean));
    }
    out.bias = out.mean - truth;
    out.variance = var_acc.sum / static_cast<double>(good);
    out.mse = out.bias * out.bias + out.variance;
    for (std::size_t r = 0; r < runs; ++r) {
        const double v = values[r * stride + offset];
        if (std::isnan(v)) continue;
        const double sq = (v - truth) * (v - truth);
        mse_sq_acc.add((sq - out.mse) * (sq - out.mse));
    }
    out.mc_se = std::sqrt(mse_sq_acc.sum / static_cast<double>(good)) /
                std::sqrt(static_cast<double>(good));
    return out;
}

double target_abs_moment(const TargetModel& target, double q) {
    if (target.kind() == TargetModel::Kind::StdNormal)
        return std::pow(2.0, 0.5 * q) * std::tgamma(0.5 * (q + 1.0)) / std::sqrt(M_PI);
    const double mu = target.mean();
    const double sd = std::sqrt(target.variance());
    const double B = std::abs(mu) + 14.0 * sd;
    const GaussLegendre& gl = GaussLegendre::rule(32);
    auto f = [&](double u) { return std::pow(std::abs(u), q) * target.density(u); };
    return detail::composite_gl(f, -B, 0.0, 400, gl) + detail::composite_gl(f, 0.0, B, 400, gl);
}

int resolve_threads(int requested) {
#ifdef _OPENMP
    return requested > 0 ? requested : omp_get_max_threads();
#else
    (void)requested;
    return 1;
#endif
}

}  // namespace

void ExperimentConfig::validate() const {
    if (runs < 1) throw std::invalid_argument("runs must be >= 1");
    if (n < 1) throw std::invalid_argument("n must be >= 1");
    if (h_grid.empty()) throw std::invalid_argument("empty h grid");
    for (std::size_t i = 0; i < h_grid.size(); ++i) {
        if (!(h_grid[i] > 0.0)) throw std::invalid_argument("h grid must be positive");
        if (i > 0 && !(h_grid[i] > h_grid[i - 1]))
            throw std::invalid_argument("h grid must be increasing");
    }
    switch (estimand) {
        case EstimandKind::Cdf:
            if (args.empty()) throw std::invalid_argument("cdf estimand needs x arguments");
            break;
        case EstimandKind::Quantile:
            if (args.empty()) throw std::invalid_argument("quantile estimand needs u arguments");
            for (double u : args)
                if (!(u > 0.0 && u < 1.0)) throw std::invalid_argument("quantile levels must be in (0,1)");
            break;
        case EstimandKind::AbsMoment:
            if (args.empty()) throw std::invalid_argument("absmoment estimand needs q arguments");
            for (double q : args)
                if (!(q > 0.0)) throw std::invalid_argument("q must be positive");
            break;
        case EstimandKind::Ise:
        case EstimandKind::Bandwidth:
            break;
    }
    spec.validate();
}

McSummary run_mse_experiment(const ExperimentConfig& cfg, const RunSink& sink) {
    cfg.validate();
    if (cfg.estimand == EstimandKind::Ise || cfg.estimand == EstimandKind::Bandwidth)
        throw std::invalid_argument("use run_ise_experiment for the ise/bandwidth estimands");
    const auto t_start = std::chrono::steady_clock::now();

    const std::size_t H = cfg.h_grid.size(), A = cfg.args.size();
    McSummary out;
    out.h_grid = cfg.h_grid;
    out.args = cfg.args;
    out.seed = cfg.seed;
    out.runs = cfg.runs;

    out.truths.resize(A);
    for (std::size_t a = 0; a < A; ++a) {
        switch (cfg.estimand) {
            case EstimandKind::Cdf: out.truths[a] = cfg.target.cdf(cfg.args[a]); break;
            case EstimandKind::Quantile: out.truths[a] = cfg.target.quantile(cfg.args[a]); break;
            case EstimandKind::AbsMoment: out.truths[a] = target_abs_moment(cfg.target, cfg.args[a]); break;
            default: break;
        }
    }

    // Shared weight tables, one per h; data-independent, so built once.
    const double x_scale = std::abs(cfg.target.mean()) + 8.0 * std::sqrt(cfg.target.variance() +
                                                                          cfg.error.variance()) + 2.0;
    double arg_extent = 0.0;
    if (cfg.estimand == EstimandKind::Cdf)
        for (double x : cfg.args) arg_extent = std::max(arg_extent, std::abs(x));
    std::vector<WeightContext> ctxs;
    std::vector<std::shared_ptr<const L1Table>> tables(H);
    ctxs.reserve(H);
    for (std::size_t ih = 0; ih < H; ++ih) {
        ctxs.emplace_back(cfg.kernel, cfg.error, cfg.h_grid[ih], cfg.spec);
        const double u_cap = 2.0 * x_scale + arg_extent + 10.0 * (cfg.h_grid[ih] + 1.0) + 5.0;
        if (cfg.estimand != EstimandKind::AbsMoment)
            tables[ih] = std::make_shared<L1Table>(ctxs[ih], u_cap);
    }

    std::vector<double> ests(cfg.runs * H * A, std::numeric_limits<double>::quiet_NaN());
    const int threads = resolve_threads(cfg.threads);

#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic) num_threads(threads)
#endif
    for (long run = 0; run < static_cast<long>(cfg.runs); ++run) {
        RngStream wstream = RngStream::derive(cfg.seed, static_cast<std::uint64_t>(run), kRoleTarget);
        RngStream dstream = RngStream::derive(cfg.seed, static_cast<std::uint64_t>(run), kRoleError);
        std::vector<double> x = cfg.target.sample(cfg.n, wstream);
        {
            RngStream& ds = dstream;
            for (auto& xi : x) xi += cfg.error.sample_one(ds);
        }
        for (std::size_t ih = 0; ih < H; ++ih) {
            DeconvFit fit(x, ctxs[ih]);
            if (tables[ih]) fit.attach_shared_cache(tables[ih]);
            double* slot = &ests[static_cast<std::size_t>(run) * H * A + ih * A];
            switch (cfg.estimand) {
                case EstimandKind::Cdf:
                    for (std::size_t a = 0; a < A; ++a) slot[a] = cdf_at(fit, cfg.args[a]);
                    break;
                case EstimandKind::Quantile: {
                    const auto grid = default_grid(fit);
                    const CdfCurve mono = monotonize(evaluate_curve_serial(fit, grid));
                    const double tol = 1e-6 * (grid.back() - grid.front());
                    for (std::size_t a = 0; a < A; ++a) {
                        try {
                            slot[a] = quantile_from_curve(
                                mono, cfg.args[a], [&](double y) { return cdf_at(fit, y); }, tol);
                        } catch (const SpanExhaustedError&) {
                            // recorded as a failure (NaN slot)
                        }
                    }
                    break;
                }
                case EstimandKind::AbsMoment: {
                    AbsMomentEvaluator ev(fit);
                    for (std::size_t a = 0; a < A; ++a) {
                        try {
                            slot[a] = ev(cfg.args[a]);
                        } catch (const NonIntegrableTailError&) {
                        } catch (const QuadratureError&) {
                        }
                    }
                    break;
                }
                default:
                    break;
            }
        }
    }

    if (sink) {
        for (std::size_t run = 0; run < cfg.runs; ++run)
            for (std::size_t ih = 0; ih < H; ++ih)
                for (std::size_t a = 0; a < A; ++a)
                    sink(run, cfg.h_grid[ih], cfg.args[a], ests[run * H * A + ih * A + a]);
    }

    out.cells.resize(H * A);
    for (std::size_t ih = 0; ih < H; ++ih)
        for (std::size_t a = 0; a < A; ++a)
            out.cells[ih * A + a] =
                reduce_cell(ests, cfg.runs, H * A, ih * A + a, out.truths[a]);

    out.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
    return out;
}

IseSummary run_ise_experiment(const ExperimentConfig& cfg, const RunSink& sink) {
    if (cfg.estimand != EstimandKind::Ise && cfg.estimand != EstimandKind::Bandwidth)
        throw std::invalid_argument("run_ise_experiment expects the ise/bandwidth estimand");
    cfg.validate();
    const auto t_start = std::chrono::steady_clock::now();

    IseSummary out;
    out.seed = cfg.seed;
    out.runs = cfg.runs;

    // Theoretical reference: exact-roughness minimum of the MISE expansion.
    Kernel select_kernel = cfg.kernel;
    if (kappa2(select_kernel) == 0.0) select_kernel = Kernel{2, 2};
    {
        MisePlan plan;
        plan.error = cfg.error;
        plan.kernel = select_kernel;
        plan.n = cfg.n;
        plan.roughness = RoughnessSource::Exact;
        plan.target = &cfg.target;
        plan.spec = cfg.spec;
        const auto res = select_bandwidth(plan);
        out.h_opt_theoretical = res.h_opt;
        out.mise_min_theoretical = res.mise_min;
    }

    const double mu = cfg.target.mean();
    const double sd = std::sqrt(cfg.target.variance());
    out.span_lo = mu - 8.0 * sd - 10.0;
    out.span_hi = mu + 8.0 * sd + 10.0;

    constexpr std::size_t kIsePoints = 2049;  // fixed Simpson grid
    const double step = (out.span_hi - out.span_lo) / static_cast<double>(kIsePoints - 1);
    const double xmax = std::max(std::abs(out.span_lo), std::abs(out.span_hi));

    std::vector<double> ise(cfg.runs, std::numeric_limits<double>::quiet_NaN());
    std::vector<double> hhat(cfg.runs, std::numeric_limits<double>::quiet_NaN());
    const int threads = resolve_threads(cfg.threads);

#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic) num_threads(threads)
#endif
    for (long run = 0; run < static_cast<long>(cfg.runs); ++run) {
        RngStream wstream = RngStream::derive(cfg.seed, static_cast<std::uint64_t>(run), kRoleTarget);
        RngStream dstream = RngStream::derive(cfg.seed, static_cast<std::uint64_t>(run), kRoleError);
        std::vector<double> x = cfg.target.sample(cfg.n, wstream);
        for (auto& xi : x) xi += cfg.error.sample_one(dstream);
        try {
            MisePlan plan;
            plan.error = cfg.error;
            plan.kernel = select_kernel;
            plan.n = cfg.n;
            plan.roughness = RoughnessSource::OneStep;
            plan.data = x;
            plan.spec = cfg.spec;
            const double h = select_bandwidth(plan).h_opt;

            WeightContext ctx(cfg.kernel, cfg.error, h, cfg.spec);
            EcfEvaluator ecf(x, ctx, xmax);
            double acc = 0.0;
            for (std::size_t i = 0; i < kIsePoints; ++i) {
                const double xi = out.span_lo + step * static_cast<double>(i);
                const double d = ecf.cdf(xi) - cfg.target.cdf(xi);
                const double w = (i == 0 || i == kIsePoints - 1) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
                acc += w * d * d;
            }
            ise[static_cast<std::size_t>(run)] = acc * step / 3.0;
            hhat[static_cast<std::size_t>(run)] = h;
        } catch (const NoiseDominatesError&) {
        } catch (const QuadratureError&) {
        }
    }

    if (sink)
        for (std::size_t run = 0; run < cfg.runs; ++run)
            sink(run, hhat[run], -1.0, ise[run]);

    out.ise = reduce_cell(ise, cfg.runs, 1, 0, out.mise_min_theoretical);
    out.h_hat = reduce_cell(hhat, cfg.runs, 1, 0, out.h_opt_theoretical);
    out.failures = out.ise.failures;
    out.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
    return out;
}

RateStudyReport run_rate_study(const TargetModel& target, double alpha, double beta,
                               const ErrorModel& error, const std::vector<std::size_t>& ns,
                               RateStudyMode mode, double x0, const ExperimentConfig& base) {
    if (!(alpha > 0.5)) throw std::invalid_argument("rate study needs alpha > 1/2");
    RateStudyReport out;
    out.ns = ns;
    const double x_eval = mode == RateStudyMode::Origin ? 0.0 : x0;
    const double truth = target.cdf(x_eval);
    const int threads = resolve_threads(base.threads);

    for (std::size_t idx = 0; idx < ns.size(); ++idx) {
        const std::size_t n = ns[idx];
        const RateBundle rb = rates(alpha, beta, n);
        const double h = mode == RateStudyMode::Origin ? rb.h1 : rb.h3;
        out.h_used.push_back(h);
        WeightContext ctx(base.kernel, error, h, base.spec);
        const double x_scale =
            std::abs(target.mean()) + 8.0 * std::sqrt(target.variance() + error.variance()) + 2.0;
        auto table = std::make_shared<const L1Table>(ctx, x_scale + std::abs(x_eval) + 5.0);

        std::vector<double> ests(base.runs, std::numeric_limits<double>::quiet_NaN());
        const std::uint64_t seed_n = base.seed ^ (0x9e3779b97f4a7c15ULL * (idx + 1));
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic) num_threads(threads)
#endif
        for (long run = 0; run < static_cast<long>(base.runs); ++run) {
            RngStream ws = RngStream::derive(seed_n, static_cast<std::uint64_t>(run), kRoleTarget);
            RngStream ds = RngStream::derive(seed_n, static_cast<std::uint64_t>(run), kRoleError);
            std::vector<double> x = target.sample(n, ws);
            for (auto& xi : x) xi += error.sample_one(ds);
            DeconvFit fit(std::move(x), ctx);
            fit.attach_shared_cache(table);
            ests[static_cast<std::size_t>(run)] = cdf_at(fit, x_eval);
        }
        const CellStats cell = reduce_cell(ests, base.runs, 1, 0, truth);
        out.mse.push_back(cell.mse);
        out.mc_se.push_back(cell.mc_se);
    }

    // least-squares slope of log mse on log n with its standard error
    const std::size_t m = ns.size();
    double sx = 0.0, sy = 0.0;
    std::vector<double> lx(m), ly(m);
    for (std::size_t i = 0; i < m; ++i) {
        lx[i] = std::log(static_cast<double>(ns[i]));
        ly[i] = std::log(out.mse[i]);
        sx += lx[i];
        sy += ly[i];
    }
    const double mx = sx / static_cast<double>(m), my = sy / static_cast<double>(m);
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        sxx += (lx[i] - mx) * (lx[i] - mx);
        sxy += (lx[i] - mx) * (ly[i] - my);
    }
    out.slope = sxy / sxx;
    double ssr = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        const double r = ly[i] - my - out.slope * (lx[i] - mx);
        ssr += r * r;
    }
    out.slope_se = m > 2 ? std::sqrt(ssr / static_cast<double>(m - 2) / sxx) : 0.0;
    return out;
}

}  // namespace deconv

// Benchmark of the OpenMP kernels against their serial reference paths:
// curve evaluation, weight-table construction, and a full Monte Carlo
// experiment. Prints one row per kernel with timings and the speedup.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <string>

#include "deconv/estimators.hpp"
#include "deconv/simlab.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace {

double now() {
    return std::chrono::duration<double>(
               std::chrono::steady_clock::now().time_since_epoch())
        .count();
}

int max_threads() {
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

void row(const std::string& name, double serial, double parallel, double max_diff) {
    std::printf("%-28s %10.3fs %10.3fs %8.2fx   max|diff| %.3g\n", name.c_str(), serial, parallel,
                serial / parallel, max_diff);
}

}  // namespace

int main() {
    using namespace deconv;
    std::printf("threads available: %d\n", max_threads());
    std::printf("%-28s %11s %11s %9s\n", "kernel", "serial", "parallel", "speedup");

    // sample data
    RngStream rng(20250809);
    const TargetModel target = TargetModel::std_normal();
    const ErrorModel error = ErrorModel::sym_gamma(2.0);
    std::vector<double> data = target.sample(400, rng);
    {
        RngStream drng(77);
        for (auto& x : data) x += error.sample_one(drng);
    }

    // 1. curve evaluation
    {
        WeightContext ctx(Kernel{4, 2}, error, 0.4);
        DeconvFit fit(data, ctx);
        const auto grid = default_grid(fit, 2049);
        const double t0 = now();
        const CdfCurve serial = evaluate_curve_serial(fit, grid);
        const double t1 = now();
        const CdfCurve parallel = evaluate_curve(fit, grid);
        const double t2 = now();
        double diff = 0.0;
        for (std::size_t i = 0; i < grid.size(); ++i)
            diff = std::max(diff, std::abs(serial.values[i] - parallel.values[i]));
        row("evaluate_curve (2049 pts)", t1 - t0, t2 - t1, diff);
    }

    // 2. weight-table construction (internally parallel over table points)
    {
        WeightContext ctx(Kernel{4, 2}, error, 0.3);
        const double t0 = now();
#ifdef _OPENMP
        omp_set_num_threads(1);
#endif
        L1Table serial(ctx, 40.0);
        const double t1 = now();
#ifdef _OPENMP
        omp_set_num_threads(max_threads());
#endif
        L1Table parallel(ctx, 40.0);
        const double t2 = now();
        double diff = 0.0;
        for (double u = -39.0; u <= 39.0; u += 0.37)
            diff = std::max(diff, std::abs(serial(u) - parallel(u)));
        row("L1Table build (|u|<=40)", t1 - t0, t2 - t1, diff);
    }

    // 3. Monte Carlo experiment, serial vs parallel replication loop
    {
        ExperimentConfig cfg;
        cfg.target = target;
        cfg.error = error;
        cfg.n = 100;
        cfg.h_grid = {0.4, 0.8, 1.2};
        cfg.estimand = EstimandKind::Cdf;
        cfg.args = {-0.8, 0.0, 1.5};
        cfg.runs = 200;
        cfg.seed = 7;
        cfg.threads = 1;
        const double t0 = now();
        const McSummary serial = run_mse_experiment(cfg);
        const double t1 = now();
        cfg.threads = 0;
        const McSummary parallel = run_mse_experiment(cfg);
        const double t2 = now();
        double diff = 0.0;
        for (std::size_t i = 0; i < serial.cells.size(); ++i)
            diff = std::max(diff, std::abs(serial.cells[i].mse - parallel.cells[i].mse));
        row("run_mse_experiment (200)", t1 - t0, t2 - t1, diff);
    }

    return 0;
}

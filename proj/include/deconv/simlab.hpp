#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "deconv/bandwidth.hpp"
#include "deconv/distributions.hpp"
#include "deconv/estimators.hpp"

namespace deconv {

enum class EstimandKind { Cdf, Quantile, AbsMoment, Ise, Bandwidth };

//! Seeded Monte Carlo experiment description.
struct ExperimentConfig {
    TargetModel target = TargetModel::std_normal();
    ErrorModel error = ErrorModel::sym_gamma(2.0);
    std::size_t n = 100;
    std::vector<double> h_grid = {0.2, 0.4, 0.6, 0.8, 1.0, 1.2, 1.4, 1.6, 1.8, 2.0};
    EstimandKind estimand = EstimandKind::Cdf;
    std::vector<double> args;  // x list / u list / q list; unused for ise
    std::size_t runs = 500;
    std::uint64_t seed = 0;
    Kernel kernel{4, 2};
    QuadratureSpec spec;
    int threads = 0;  // 0: library default; 1: serial reference path

    void validate() const;
};

struct CellStats {
    double mean = 0.0;
    double bias = 0.0;
    double variance = 0.0;
    double mse = 0.0;
    double mc_se = 0.0;  // Monte Carlo standard error of the MSE estimate
    std::size_t failures = 0;
};

struct McSummary {
    std::vector<double> h_grid;
    std::vector<double> args;
    std::vector<double> truths;        // per argument
    std::vector<CellStats> cells;      // h-major: cell(ih, ia)
    std::uint64_t seed = 0;
    std::size_t runs = 0;
    double wall_seconds = 0.0;         // metadata only, never serialized

    const CellStats& cell(std::size_t ih, std::size_t ia) const {
        return cells[ih * args.size() + ia];
    }
};

//! Per-run estimate sink for --dump-runs style output.
using RunSink = std::function<void(std::size_t run, double h, double arg, double value)>;

//! Draw W and delta from per-run derived streams, form X = W + delta,
//! evaluate the estimand at every (h, argument), and reduce with
//! compensated summation in fixed run order, so the summary is identical
//! for any thread count.
McSummary run_mse_experiment(const ExperimentConfig& cfg, const RunSink& sink = {});

struct IseSummary {
    CellStats ise;        // truth: the theoretical minimum of the MISE expansion
    CellStats h_hat;      // truth: the theoretical optimal bandwidth
    double h_opt_theoretical = 0.0;
    double mise_min_theoretical = 0.0;
    double span_lo = 0.0, span_hi = 0.0;  // fixed ISE quadrature span
    std::uint64_t seed = 0;
    std::size_t runs = 0;
    std::size_t failures = 0;
    double wall_seconds = 0.0;
};

//! Data-driven bandwidth per run (one-step plug-in), then
//! ISE = int (F-hat(x|h-hat) - F_W(x))^2 dx by 2049-point Simpson over a
//! fixed target-based span; also records the h-hat draws.
IseSummary run_ise_experiment(const ExperimentConfig& cfg, const RunSink& sink = {});

enum class RateStudyMode { Origin, Offset };

struct RateStudyReport {
    std::vector<std::size_t> ns;
    std::vector<double> mse;
    std::vector<double> mc_se;
    std::vector<double> h_used;
    double slope = 0.0;     // of log mse on log n
    double slope_se = 0.0;
};

//! Empirical convergence-rate study: MSE of F-hat at the origin or at a
//! fixed offset x0, with h = h1(n) (origin) or h3(n) (offset) from the
//! rate formulas, regressed on log n.
RateStudyReport run_rate_study(const TargetModel& target, double alpha, double beta,
                               const ErrorModel& error, const std::vector<std::size_t>& ns,
                               RateStudyMode mode, double x0, const ExperimentConfig& base);

}  // namespace deconv

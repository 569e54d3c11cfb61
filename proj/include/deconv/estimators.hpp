#pragma once

#include <memory>
#include <span>
#include <vector>

#include "deconv/rng.hpp"
#include "deconv/transforms.hpp"

namespace deconv {

//! A sample bound to its weight context; the object all estimators
//! evaluate against. Immutable after construction.
class DeconvFit {
public:
    DeconvFit(std::vector<double> data, WeightContext ctx);

    const std::vector<double>& data() const { return data_; }
    const WeightContext& ctx() const { return ctx_; }
    std::size_t n() const { return data_.size(); }
    double min_x() const { return min_x_; }
    double max_x() const { return max_x_; }

    //! Default evaluation span [min X - 10(h+1), max X + 10(h+1)].
    double span_lo() const;
    double span_hi() const;

    //! Attach a shared L1 lookup table covering |x - X_j| <= u_abs_max
    //! (h > 0 only). Accelerates curve evaluation; values outside the
    //! table fall back to exact quadrature, so results match the direct
    //! path within the table's verified tolerance.
    void attach_cache(double u_abs_max);
    //! Share a prebuilt table (it only depends on kernel/error/h, not data).
    void attach_shared_cache(std::shared_ptr<const L1Table> table) { cache_ = std::move(table); }
    const L1Table* cache() const { return cache_.get(); }

private:
    std::vector<double> data_;
    WeightContext ctx_;
    std::shared_ptr<const L1Table> cache_;
    double min_x_, max_x_;
};

//! Raw distribution-function estimate: n^-1 sum_j L1(x - X_j | h).
//! Not clamped to [0, 1].
double cdf_at(const DeconvFit& fit, double x);

//! Density estimate (n h)^-1 sum_j L((x - X_j)/h); requires h > 0.
double density_at(const DeconvFit& fit, double x);

struct CdfCurve {
    std::vector<double> grid;    // strictly increasing
    std::vector<double> values;  // same length
    bool monotonized = false;
};

//! Evaluate the raw estimator over a grid (OpenMP-parallel over points).
CdfCurve evaluate_curve(const DeconvFit& fit, std::span<const double> grid);

//! Serial reference implementation; identical results, kept for testing
//! and benchmarking against the parallel kernel.
CdfCurve evaluate_curve_serial(const DeconvFit& fit, std::span<const double> grid);

//! Running maximum over the grid ordering; idempotent.
CdfCurve monotonize(const CdfCurve& curve);

//! Uniform grid over the fit's default span.
std::vector<double> default_grid(const DeconvFit& fit, std::size_t points = 1025);

struct QuantileOptions {
    std::size_t grid_points = 1025;
    double span_lo = 0.0, span_hi = 0.0;  // both zero: use fit defaults
};

//! sup{y : F-hat-mon(y) <= u}, located on the monotonized grid curve and
//! refined by bisection to 1e-6 of the span.
double quantile(const DeconvFit& fit, double u, const QuantileOptions& opts = {});

//! Same inversion given an already monotonized curve; `point_eval` supplies
//! raw F-hat values for the bisection refinement.
template <class F>
double quantile_from_curve(const CdfCurve& mono, double u, F&& point_eval, double tol);

//! Polynomial moment recursion:
//!     mu_r = n^-1 sum X^r - sum_{j=2}^r C(r,j) E(delta^j) mu_{r-j},
//! with E(delta^j) = 0 for odd j and mu_0 = 1.
double poly_moment(std::span<const double> data, const ErrorModel& error, int r);

//! Absolute-moment estimate nu_q = int |u|^q dF-hat(u|h), computed through
//! the characteristic function of the estimated measure (see .cpp notes).
double abs_moment(const DeconvFit& fit, double q);

//! Reusable form of abs_moment: the empirical characteristic function is
//! evaluated once on a fixed quadrature node set (h > 0), after which each
//! q costs O(nodes). h = 0 fits fall back to the adaptive scalar path.
class AbsMomentEvaluator {
public:
    explicit AbsMomentEvaluator(const DeconvFit& fit);
    double operator()(double q) const;

private:
    const DeconvFit& fit_;
    bool tabulated_ = false;
    double t0_ = 0.0;
    double x_abs_max_ = 0.0;
    // two resolutions for the stabilization check
    std::vector<double> t_coarse_, w_coarse_, cpsi_coarse_;
    std::vector<double> t_fine_, w_fine_, cpsi_fine_;
};

//! Inverse-transform draws from the clamped, monotonized curve on the
//! default span. Deterministic given the stream.
std::vector<double> resample(const DeconvFit& fit, std::size_t m, RngStream& rng);

//! Batch evaluator factoring the estimator through the empirical
//! characteristic function: one pass over the data per quadrature node,
//! then any number of evaluation points at O(nodes) trig each. Matches
//! the pointwise estimators within quadrature tolerance (the sum over
//! data is regrouped, nothing else changes). Requires h > 0.
class EcfEvaluator {
public:
    EcfEvaluator(std::span<const double> data, const WeightContext& ctx, double x_abs_max);

    double cdf(double x) const;
    double density(double x) const;
    double density_deriv(double x) const;
    std::size_t node_count() const { return t_.size(); }

private:
    EcfEvaluator() = default;
    void build(std::span<const double> data, const WeightContext& ctx, double x_abs_max,
               long panels);
    std::vector<double> t_;    // quadrature nodes on (0, 1/h)
    std::vector<double> wc_;   // weight * psi * Chat(t)
    std::vector<double> ws_;   // weight * psi * Shat(t)
    std::vector<double> wct_;  // wc / t
    std::vector<double> wst_;  // ws / t
};

// --- template implementation ---------------------------------------------

template <class F>
double quantile_from_curve(const CdfCurve& mono, double u, F&& point_eval, double tol) {
    if (!(u > 0.0 && u < 1.0)) throw std::domain_error("quantile level must lie in (0, 1)");
    const auto& v = mono.values;
    const auto& g = mono.grid;
    if (v.empty()) throw std::invalid_argument("empty curve");
    if (v.front() > u)
        throw SpanExhaustedError("monotone estimate already exceeds u at the left span edge");
    // largest grid index with value <= u
    std::size_t idx = 0;
    for (std::size_t i = 0; i < v.size(); ++i)
        if (v[i] <= u) idx = i;
    if (idx + 1 >= v.size())
        throw SpanExhaustedError("monotone estimate never crosses u inside the span");
    double lo = g[idx], hi = g[idx + 1];
    const double floor_val = v[idx];
    while (hi - lo > tol) {
        const double mid = 0.5 * (lo + hi);
        const double val = std::max(floor_val, point_eval(mid));
        if (val <= u)
            lo = mid;
        else
            hi = mid;
    }
    return lo;
}

}  // namespace deconv

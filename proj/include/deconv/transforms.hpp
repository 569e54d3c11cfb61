#pragma once

#include <memory>
#include <vector>

#include "deconv/distributions.hpp"
#include "deconv/kernels.hpp"
#include "deconv/quadrature.hpp"

namespace deconv {

//! Everything a weight evaluation needs: kernel, error law, bandwidth and
//! quadrature control. Immutable after construction.
//!
//! h = 0 is the raw-inversion limit. It is accepted when the error model
//! is NoError or its smoothness classification is root-n feasible
//! (tail exponent < 1/2); for tail exponents in [1/2, 1) the pointwise
//! weights still exist and the context is created with a warning flag
//! instead of an error. Tail exponents >= 1 are rejected.
class WeightContext {
public:
    WeightContext(Kernel kernel, ErrorModel error, double h, QuadratureSpec spec = {});

    const Kernel& kernel() const { return kernel_; }
    const ErrorModel& error() const { return error_; }
    double h() const { return h_; }
    const QuadratureSpec& spec() const { return spec_; }

    //! Integrand factor K^Ft(h t) / f_delta^Ft(t); for h = 0, 1 / f^Ft(t).
    double psi(double t) const;

    //! Upper integration limit: 1/h (kernel support) or t_max at h = 0.
    double upper_limit() const;

    bool zero_bandwidth() const { return h_ == 0.0; }
    bool zero_bandwidth_warning() const { return zero_bw_warning_; }

    //! Truncation-error bound for the h = 0 weight: the neglected
    //! improper tail of L1(u|0) is bounded by coeff / |u| (alternating
    //! half-lobe envelope). Zero for h > 0.
    double zero_bw_tail_coeff() const { return zero_bw_tail_coeff_; }

private:
    Kernel kernel_;
    ErrorModel error_;
    double h_;
    QuadratureSpec spec_;
    bool zero_bw_warning_ = false;
    double zero_bw_tail_coeff_ = 0.0;
};

//! Distribution weight L1(u|h) = 1/2 + (1/pi) int_0^T sin(tu)/t psi(t) dt,
//! the integral of the density weight. Exactly 1/2 at u = 0.
double l1_weight(const WeightContext& ctx, double u);

//! Density weight evaluated in unscaled form,
//!     L(u) = (1/pi) int_0^1 cos(vu) K^Ft(v) / f^Ft(v/h) dv,
//! i.e. the substitution v = h t applied to the Fourier inversion, so the
//! estimator consumes L((x - X_j)/h). Requires h > 0.
double l_weight(const WeightContext& ctx, double u);

//! Uniform-grid table of L1(.|h) with cubic interpolation, exploiting the
//! odd symmetry of L1 - 1/2. Built once per (kernel, error, h) and shared
//! read-only across threads; evaluations outside the tabulated range fall
//! back to exact quadrature. Requires h > 0 (the h = 0 weight is not
//! band-limited, so tabulation has no resolution guarantee there).
class L1Table {
public:
    L1Table(const WeightContext& ctx, double u_abs_max, int points_per_h = 16);

    double operator()(double u) const;
    double u_max() const { return u_max_; }

private:
    WeightContext ctx_;
    double u_max_;
    double step_;
    std::vector<double> values_;  // L1(u) - 1/2 on 0, step, 2*step, ...
};

}  // namespace deconv

#pragma once

#include <optional>

#include "deconv/distributions.hpp"
#include "deconv/kernels.hpp"
#include "deconv/quadrature.hpp"

namespace deconv {

//! Tail behaviour entering the limit-theorem constants:
//!   f_delta^Ft(t) ~ z^-1 t^-alpha,   f_W^Ft(t) = (a + i b) t^-beta + o(t^-beta).
struct TailProfile {
    double alpha = 1.0;  // error tail exponent, > 0
    double z = 1.0;      // reciprocal of the error tail constant
    double beta = 0.0;   // target tail exponent, >= 0
    double a = 0.0;
    double b = 0.0;

    void validate() const;
};

//! Optimal rates and bandwidth orders. For alpha < 1/2 every rho_j is n^-1
//! and every h_j is 0; at alpha = 1/2 the log factor ell = log n enters.
struct RateBundle {
    double rho1 = 0.0, rho2 = 0.0, rho3 = 0.0, rho4 = 0.0;
    double h1 = 0.0, h2 = 0.0, h3 = 0.0;
    double ell = 1.0;
};

//!   rho_j = (ell/n)^{(2 beta + j - 1)/(2 alpha + 2 beta + j - 2)},
//!   h_j = C (ell/n)^{1/(2 alpha + 2 beta + j - 2)}   (alpha >= 1/2),
//!   rho4 = n^{-(2 beta + 2 q)/(2 alpha + 2 beta - 1)} (when q is given).
RateBundle rates(double alpha, double beta, std::size_t n, double C = 1.0,
                 std::optional<double> q = {});

//! Bias constant at the origin:
//!   B1 = -(b / 2 pi) sum_{j=1}^s C(s, j) (-1)^j / (r j - beta).
double bias_b1(const Kernel& kernel, const TailProfile& profile);

//! Off-origin bias factor B2(h, x) = -(a cos(x/h) + b sin(x/h)) / (2 pi x).
double bias_b2(double h, double x, const TailProfile& profile);

//! Asymptotic variance constant of the distribution estimator,
//!     V(x) = 2 pi^-2 z^2 f_X(x) int_0^inf { int_0^1 sin(tu)/t (1-t^r)^s t^alpha dt }^2 du.
//! The leading 2 folds the symmetric u half-lines; the half-line form as
//! printed underpredicts the Monte Carlo variance by exactly that factor
//! (see the accompanying tests). Requires alpha > 1/2.
double variance_v(double x, const TailProfile& profile, const Kernel& kernel, double fx,
                  const QuadratureSpec& spec = {});

//! f_X = f_W * f_delta by numeric convolution (identity for NoError).
double fx_density(const TargetModel& target, const ErrorModel& error, double x,
                  const QuadratureSpec& spec = {});

}  // namespace deconv

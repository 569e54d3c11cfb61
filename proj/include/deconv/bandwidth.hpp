#pragma once

#include <span>
#include <utility>
#include <vector>

#include "deconv/distributions.hpp"
#include "deconv/kernels.hpp"
#include "deconv/quadrature.hpp"

namespace deconv {

//! How the target roughness int (f_W')^2 entering the h^4 bias term is
//! obtained.
enum class RoughnessSource {
    Exact,            // closed form / quadrature from a known target
    NormalReference,  // (4 sqrt(pi) sigma_W^3)^-1 with sigma_W from the data
    OneStep,          // normal-reference pilot, then roughness of the
                      // estimated density derivative
};

struct MisePlan {
    ErrorModel error = ErrorModel::no_error();
    Kernel kernel{2, 2};
    std::size_t n = 100;
    RoughnessSource roughness = RoughnessSource::Exact;
    const TargetModel* target = nullptr;     // Exact mode
    std::span<const double> data;            // NormalReference / OneStep modes
    double h_min = 0.01, h_max = 3.0;
    std::size_t resolution = 60;
    QuadratureSpec spec;

    void validate() const;
};

//! Variance-inflation integral of the MISE expansion:
//!     I(h) = (1/2pi) int_-inf^inf t^-2 {1 - K^Ft(ht)/f_delta^Ft(t)}^2 dt,
//! evaluated as twice the half-line integral; the region beyond the
//! kernel support contributes exactly h. Requires root-n feasibility
//! when h = 0.
double mise_I(const ErrorModel& error, const Kernel& kernel, double h,
              const QuadratureSpec& spec = {});

//! Constant of the small-h asymptote I(h) ~ A h^{1-2 alpha}, derived by
//! substituting the tail law f^Ft ~ C t^-alpha into the I(h) integral:
//!     A = kappa / (pi C^2),  kappa = int_0^1 t^{2 alpha - 2} K^Ft(t)^2 dt.
//! (The printed form C^2 kappa / pi is dimensionally inconsistent with
//! that substitution; the derived constant is validated against exact
//! I(h) by the ratio test.) Requires alpha > 1/2.
double a_delta(const ErrorModel& error, const Kernel& kernel, const QuadratureSpec& spec = {});

//! sigma_W-hat^2 = sample variance - var(delta); refuses when nonpositive.
double estimate_sigma_w(std::span<const double> data, const ErrorModel& error);

double normal_reference_roughness(double sigma_w);

struct BandwidthResult {
    double h_opt = 0.0;
    double mise_min = 0.0;
    double roughness = 0.0;  // the R-hat actually used
    std::vector<std::pair<double, double>> curve;  // (h, M(h)) on the search grid
};

//! Minimize M(h) = I(h)/n + (kappa2^2/4) R-hat h^4 over the search
//! bracket: log-spaced grid scan, then golden-section refinement.
BandwidthResult select_bandwidth(const MisePlan& plan);

//! One-step roughness: normal-reference pilot bandwidth h0, then
//! R-hat = int (f-hat'(u|h0))^2 du over the standard span.
double one_step_roughness(std::span<const double> data, const ErrorModel& error,
                          const Kernel& kernel, const QuadratureSpec& spec = {});

}  // namespace deconv

#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "deconv/rng.hpp"

namespace deconv {

//! Known error-distribution models. All built-ins are ordinary smooth:
//! the characteristic function is real, even, strictly positive, and
//! decays polynomially like tail_constant * t^{-tail_exponent}.
class ErrorModel {
public:
    enum class Kind { SymGamma, Laplace, NoError };

    static ErrorModel sym_gamma(double alpha);
    static ErrorModel laplace(double scale);
    static ErrorModel no_error();

    Kind kind() const { return kind_; }
    double param() const { return param_; }

    //! Characteristic function f_delta^Ft(t); even, in (0, 1].
    double cf(double t) const;

    //! E(delta^{2j}), exact.
    double even_moment(int j) const;

    //! Exponent alpha in f^Ft(t) ~ c t^{-alpha} (0 for NoError).
    double tail_exponent() const { return tail_exponent_; }

    //! Constant c in f^Ft(t) ~ c t^{-alpha} (the paper's z^{-1}).
    double tail_constant() const { return tail_constant_; }

    double variance() const { return even_moment(1); }

    double sample_one(RngStream& rng) const;
    std::vector<double> sample(std::size_t n, RngStream& rng) const;

    //! Density f_delta(x). SymGamma uses the Bessel-K closed form of the
    //! difference of two Gamma(alpha/2, 1) variables; diverges at x = 0
    //! when alpha <= 1 (integrable singularity).
    double density(double x) const;

    std::string describe() const;

private:
    ErrorModel(Kind kind, double param);
    Kind kind_;
    double param_;
    double tail_exponent_;
    double tail_constant_;
};

//! Synthetic truth models for the unobserved variable W.
class TargetModel {
public:
    enum class Kind { StdNormal, NormalMixture, Gamma2, Custom };

    static TargetModel std_normal();
    static TargetModel normal_mixture();  // 0.5 N(-3,1) + 0.5 N(2,1)
    static TargetModel gamma2();          // Gamma(shape 2, rate 1)
    static TargetModel custom(std::function<double(double)> density,
                              std::function<double(double)> cdf,
                              std::function<double(RngStream&)> sampler,
                              std::optional<double> known_roughness = {});

    Kind kind() const { return kind_; }

    double density(double x) const;
    double cdf(double x) const;
    double sample_one(RngStream& rng) const;
    std::vector<double> sample(std::size_t n, RngStream& rng) const;

    double mean() const;
    double variance() const;

    //! True quantile by bisection on the cdf.
    double quantile(double u) const;

    std::optional<double> known_roughness() const { return known_roughness_; }
    std::string describe() const;

private:
    explicit TargetModel(Kind kind);
    Kind kind_;
    std::optional<double> known_roughness_;
    std::function<double(double)> custom_density_;
    std::function<double(double)> custom_cdf_;
    std::function<double(RngStream&)> custom_sampler_;
};

//! int (f_W')^2: closed form for the built-ins, adaptive quadrature of the
//! squared numerical derivative for Custom models that carry a density.
double target_roughness(const TargetModel& model);

enum class SmoothnessVerdict { Feasible, Infeasible, Inconclusive };

struct SmoothnessReport {
    SmoothnessVerdict verdict;
    double partial_integral;  // truncated value of the tested integral
};

//! Numeric root-n feasibility test. Without q this probes convergence of
//! int_1^inf t^{-2} f^Ft(t)^{-2} dt by comparing dyadic block integrals
//! [2^k, 2^{k+1}] against geometric decay; with q the weight becomes
//! t^{-2(q+1)} (the moment-mode criterion; its companion requirement
//! E delta^{4(k+1)} < infinity holds for every built-in model).
SmoothnessReport smoothness_class(const ErrorModel& error, std::optional<double> q = {});

//! CLI model specs: "symgamma:A", "laplace:B", "noerror" / "normal",
//! "mixture", "gamma2". Case-insensitive; malformed specs throw.
ErrorModel parse_error_spec(const std::string& spec);
TargetModel parse_target_spec(const std::string& spec);

const char* to_string(SmoothnessVerdict v);

}  // namespace deconv

#include "deconv/distributions.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "deconv/errors.hpp"
#include "deconv/quadrature.hpp"

namespace deconv {

namespace {

double normal_pdf(double x) { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * M_PI); }
double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

//! Moments from cumulants: m_n = sum_k C(n-1, k-1) kappa_k m_{n-k}.
double moment_from_even_cumulants(int n, const std::function<double(int)>& even_cumulant) {
    std::vector<double> m(static_cast<std::size_t>(n) + 1, 0.0);
    m[0] = 1.0;
    for (int i = 1; i <= n; ++i) {
        if (i % 2 == 1) continue;  // symmetric: odd moments vanish
        double acc = 0.0;
        for (int k = 2; k <= i; k += 2) {
            double binom = 1.0;
            for (int j = 1; j <= k - 1; ++j) binom *= static_cast<double>(i - j) / static_cast<double>(j);
            acc += binom * even_cumulant(k / 2) * m[static_cast<std::size_t>(i - k)];
        }
        m[static_cast<std::size_t>(i)] = acc;
    }
    return m[static_cast<std::size_t>(n)];
}

double factorial(int n) {
    double f = 1.0;
    for (int i = 2; i <= n; ++i) f *= i;
    return f;
}

}  // namespace

ErrorModel::ErrorModel(Kind kind, double param) : kind_(kind), param_(param) {
    switch (kind_) {
        case Kind::SymGamma:
            tail_exponent_ = param_;
            tail_constant_ = 1.0;
            break;
        case Kind::Laplace:
            tail_exponent_ = 2.0;
            tail_constant_ = 1.0 / (param_ * param_);
            break;
        case Kind::NoError:
            tail_exponent_ = 0.0;
            tail_constant_ = 1.0;
            break;
    }
}

ErrorModel ErrorModel::sym_gamma(double alpha) {
    if (!(alpha > 0.0)) throw std::invalid_argument("symgamma alpha must be positive");
    return ErrorModel(Kind::SymGamma, alpha);
}

ErrorModel ErrorModel::laplace(double scale) {
    if (!(scale > 0.0)) throw std::invalid_argument("laplace scale must be positive");
    return ErrorModel(Kind::Laplace, scale);
}

ErrorModel ErrorModel::no_error() { return ErrorModel(Kind::NoError, 0.0); }

double ErrorModel::cf(double t) const {
    switch (kind_) {
        case Kind::SymGamma:
            return std::pow(1.0 + t * t, -0.5 * param_);
        case Kind::Laplace:
            return 1.0 / (1.0 + param_ * param_ * t * t);
        case Kind::NoError:
            return 1.0;
    }
    return 1.0;
}

double ErrorModel::even_moment(int j) const {
    if (j < 0) throw UnsupportedMomentError("moment order must be nonnegative");
    if (j == 0) return 1.0;
    if (j > 85) throw UnsupportedMomentError("moment order too large for double precision");
    switch (kind_) {
        case Kind::NoError:
            return 0.0;
        case Kind::SymGamma:
            // even cumulants of Gamma(a,1) - Gamma(a,1), a = alpha/2:
            // kappa_{2m} = 2 a (2m-1)! = alpha (2m-1)!
            return moment_from_even_cumulants(
                2 * j, [&](int m) { return param_ * factorial(2 * m - 1); });
        case Kind::Laplace:
            // E X^{2j} = (2j)! b^{2j}
            return factorial(2 * j) * std::pow(param_, 2.0 * j);
    }
    return 0.0;
}

double ErrorModel::sample_one(RngStream& rng) const {
    switch (kind_) {
        case Kind::SymGamma: {
            const double a = 0.5 * param_;
            return rng.gamma(a) - rng.gamma(a);
        }
        case Kind::Laplace:
            return param_ * (rng.exponential() - rng.exponential());
        case Kind::NoError:
            return 0.0;
    }
    return 0.0;
}

std::vector<double> ErrorModel::sample(std::size_t n, RngStream& rng) const {
    std::vector<double> out(n);
    for (auto& v : out) v = sample_one(rng);
    return out;
}

double ErrorModel::density(double x) const {
    switch (kind_) {
        case Kind::NoError:
            throw std::invalid_argument("NoError has no density");
        case Kind::Laplace:
            return 0.5 / param_ * std::exp(-std::abs(x) / param_);
        case Kind::SymGamma: {
            // difference of two Gamma(a,1): f(x) = (|x|/2)^{a-1/2} K_{a-1/2}(|x|) / (sqrt(pi) Gamma(a))
            const double a = 0.5 * param_;
            const double ax = std::abs(x);
            const double nu = a - 0.5;
            if (ax < 1e-12) {
                if (a > 0.5) return std::tgamma(nu) / (2.0 * std::sqrt(M_PI) * std::tgamma(a));
                return std::numeric_limits<double>::infinity();
            }
            return std::pow(0.5 * ax, nu) * std::cyl_bessel_k(nu, ax) /
                   (std::sqrt(M_PI) * std::tgamma(a));
        }
    }
    return 0.0;
}

std::string ErrorModel::describe() const {
    switch (kind_) {
        case Kind::SymGamma: return "symgamma:" + std::to_string(param_);
        case Kind::Laplace: return "laplace:" + std::to_string(param_);
        case Kind::NoError: return "noerror";
    }
    return "?";
}

TargetModel::TargetModel(Kind kind) : kind_(kind) {}

TargetModel TargetModel::std_normal() {
    TargetModel m(Kind::StdNormal);
    m.known_roughness_ = 1.0 / (4.0 * std::sqrt(M_PI));
    return m;
}

TargetModel TargetModel::normal_mixture() {
    TargetModel m(Kind::NormalMixture);
    // int (f')^2 for 0.5 N(-3,1) + 0.5 N(2,1): Gaussian cross terms in
    // closed form via -g''(Delta), g = N(0,2) pdf, Delta = 5.
    auto g2 = [](double x) {
        const double g = std::exp(-0.25 * x * x) / (2.0 * std::sqrt(M_PI));
        return g * (x * x - 2.0) / 4.0;
    };
    m.known_roughness_ = 0.5 * (-g2(0.0) - g2(5.0));
    return m;
}

TargetModel TargetModel::gamma2() {
    TargetModel m(Kind::Gamma2);
    m.known_roughness_ = 0.25;
    return m;
}

TargetModel TargetModel::custom(std::function<double(double)> density,
                                std::function<double(double)> cdf,
                                std::function<double(RngStream&)> sampler,
                                std::optional<double> known_roughness) {
    TargetModel m(Kind::Custom);
    m.custom_density_ = std::move(density);
    m.custom_cdf_ = std::move(cdf);
    m.custom_sampler_ = std::move(sampler);
    m.known_roughness_ = known_roughness;
    return m;
}

double TargetModel::density(double x) const {
    switch (kind_) {
        case Kind::StdNormal: return normal_pdf(x);
        case Kind::NormalMixture: return 0.5 * normal_pdf(x + 3.0) + 0.5 * normal_pdf(x - 2.0);
        case Kind::Gamma2: return x > 0.0 ? x * std::exp(-x) : 0.0;
        case Kind::Custom:
            if (!custom_density_) throw std::invalid_argument("custom target has no density");
            return custom_density_(x);
    }
    return 0.0;
}

double TargetModel::cdf(double x) const {
    switch (kind_) {
        case Kind::StdNormal: return normal_cdf(x);
        case Kind::NormalMixture: return 0.5 * normal_cdf(x + 3.0) + 0.5 * normal_cdf(x - 2.0);
        case Kind::Gamma2: return x > 0.0 ? 1.0 - std::exp(-x) * (1.0 + x) : 0.0;
        case Kind::Custom:
            if (!custom_cdf_) throw std::invalid_argument("custom target has no cdf");
            return custom_cdf_(x);
    }
    return 0.0;
}

double TargetModel::sample_one(RngStream& rng) const {
    switch (kind_) {
        case Kind::StdNormal: return rng.normal();
        case Kind::NormalMixture: return rng.uniform() < 0.5 ? rng.normal() - 3.0 : rng.normal() + 2.0;
        case Kind::Gamma2: return rng.gamma(2.0);
        case Kind::Custom:
            if (!custom_sampler_) throw std::invalid_argument("custom target has no sampler");
            return custom_sampler_(rng);
    }
    return 0.0;
}

std::vector<double> TargetModel::sample(std::size_t n, RngStream& rng) const {
    std::vector<double> out(n);
    for (auto& v : out) v = sample_one(rng);
    return out;
}

double TargetModel::mean() const {
    switch (kind_) {
        case Kind::StdNormal: return 0.0;
        case Kind::NormalMixture: return -0.5;
        case Kind::Gamma2: return 2.0;
        case Kind::Custom: break;
    }
    // numeric fallback from the cdf: E X = int_0^inf (1-F) - int_0^inf F(-x)
    auto tail_hi = [&](double x) { return 1.0 - cdf(x); };
    auto tail_lo = [&](double x) { return cdf(-x); };
    const GaussLegendre& gl = GaussLegendre::rule(32);
    return detail::composite_gl(tail_hi, 0.0, 60.0, 240, gl) -
           detail::composite_gl(tail_lo, 0.0, 60.0, 240, gl);
}

double TargetModel::variance() const {
    switch (kind_) {
        case Kind::StdNormal: return 1.0;
        case Kind::NormalMixture: return 7.25;  // 0.5(1+9)+0.5(1+4) - 0.25
        case Kind::Gamma2: return 2.0;
        case Kind::Custom: break;
    }
    const double mu = mean();
    const GaussLegendre& gl = GaussLegendre::rule(32);
    auto f = [&](double x) { return (x - mu) * (x - mu) * density(x); };
    return detail::composite_gl(f, mu - 60.0, mu + 60.0, 480, gl);
}

double TargetModel::quantile(double u) const {
    if (!(u > 0.0 && u < 1.0)) throw std::domain_error("quantile level must be in (0,1)");
    double lo = -1.0, hi = 1.0;
    while (cdf(lo) > u && lo > -1e12) lo *= 2.0;
    while (cdf(hi) < u && hi < 1e12) hi *= 2.0;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (cdf(mid) <= u)
            lo = mid;
        else
            hi = mid;
        if (hi - lo < 1e-13 * (1.0 + std::abs(lo))) break;
    }
    return 0.5 * (lo + hi);
}

std::string TargetModel::describe() const {
    switch (kind_) {
        case Kind::StdNormal: return "normal";
        case Kind::NormalMixture: return "mixture";
        case Kind::Gamma2: return "gamma2";
        case Kind::Custom: return "custom";
    }
    return "?";
}

double target_roughness(const TargetModel& model) {
    if (model.known_roughness()) return *model.known_roughness();
    // Custom without a recorded value: quadrature of the squared numerical
    // derivative of the density.
    const double mu = model.mean();
    const double sd = std::sqrt(model.variance());
    const double eps = 1e-5 * sd;
    auto fp2 = [&](double x) {
        const double d = (model.density(x + eps) - model.density(x - eps)) / (2.0 * eps);
        return d * d;
    };
    const GaussLegendre& gl = GaussLegendre::rule(32);
    return detail::composite_gl(fp2, mu - 12.0 * sd, mu + 12.0 * sd, 600, gl);
}

SmoothnessReport smoothness_class(const ErrorModel& error, std::optional<double> q) {
    if (q && !(*q > 0.0)) throw std::invalid_argument("q must be positive");
    const double wexp = q ? 2.0 * (*q + 1.0) : 2.0;
    auto block_integrand = [&](double t) {
        const double f = error.cf(t);
        return std::pow(t, -wexp) / (f * f);
    };
    const GaussLegendre& gl = GaussLegendre::rule(32);

    // Dyadic blocks [2^k, 2^{k+1}], k = 0..40; classify by the tail
    // behaviour of the block ratios.
    constexpr int kBlocks = 41;
    std::vector<double> blocks(kBlocks);
    double partial = 0.0;
    for (int k = 0; k < kBlocks; ++k) {
        const double a = std::pow(2.0, k);
        blocks[static_cast<std::size_t>(k)] = detail::composite_gl(block_integrand, a, 2.0 * a, 8, gl);
        partial += blocks[static_cast<std::size_t>(k)];
        if (partial > 1e250) {  // clearly divergent; stop before overflow
            return {SmoothnessVerdict::Infeasible, partial};
        }
    }
    int below = 0, above = 0, tail = 0;
    for (int k = kBlocks - 11; k < kBlocks - 1; ++k) {
        const double ratio = blocks[static_cast<std::size_t>(k + 1)] / blocks[static_cast<std::size_t>(k)];
        ++tail;
        if (ratio < 0.95) ++below;
        if (ratio >= 1.05) ++above;
    }
    if (below == tail) return {SmoothnessVerdict::Feasible, partial};
    if (above == tail) return {SmoothnessVerdict::Infeasible, partial};
    return {SmoothnessVerdict::Inconclusive, partial};
}

namespace {

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
    return s;
}

double parse_positive(const std::string& text, const std::string& what) {
    std::size_t pos = 0;
    double v = 0.0;
    try {
        v = std::stod(text, &pos);
    } catch (const std::exception&) {
        throw std::invalid_argument("malformed " + what + " parameter: '" + text + "'");
    }
    if (pos != text.size() || !(v > 0.0))
        throw std::invalid_argument("malformed " + what + " parameter: '" + text + "'");
    return v;
}

}  // namespace

ErrorModel parse_error_spec(const std::string& spec) {
    const std::string s = lower(spec);
    if (s == "noerror") return ErrorModel::no_error();
    const auto colon = s.find(':');
    const std::string head = s.substr(0, colon);
    if (head == "symgamma") {
        if (colon == std::string::npos) throw std::invalid_argument("symgamma requires ':ALPHA'");
        return ErrorModel::sym_gamma(parse_positive(s.substr(colon + 1), "symgamma"));
    }
    if (head == "laplace") {
        if (colon == std::string::npos) throw std::invalid_argument("laplace requires ':SCALE'");
        return ErrorModel::laplace(parse_positive(s.substr(colon + 1), "laplace"));
    }
    throw std::invalid_argument("unknown error model spec: '" + spec + "'");
}

TargetModel parse_target_spec(const std::string& spec) {
    const std::string s = lower(spec);
    if (s == "normal") return TargetModel::std_normal();
    if (s == "mixture") return TargetModel::normal_mixture();
    if (s == "gamma2") return TargetModel::gamma2();
    throw std::invalid_argument("unknown target model spec: '" + spec + "'");
}

const char* to_string(SmoothnessVerdict v) {
    switch (v) {
        case SmoothnessVerdict::Feasible: return "feasible";
        case SmoothnessVerdict::Infeasible: return "infeasible";
        case SmoothnessVerdict::Inconclusive: return "inconclusive";
    }
    return "?";
}

}  // namespace deconv

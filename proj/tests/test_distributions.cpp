#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "deconv/distributions.hpp"
#include "deconv/errors.hpp"
#include "deconv/quadrature.hpp"
#include "oracles.hpp"

using namespace deconv;

TEST_CASE("error characteristic functions") {
    const auto sg2 = ErrorModel::sym_gamma(2.0);
    const auto sg6 = ErrorModel::sym_gamma(6.0);
    CHECK(sg2.cf(1.0) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(sg6.cf(3.0) == doctest::Approx(0.001).epsilon(1e-15));
    CHECK(sg2.cf(0.0) == 1.0);
    CHECK(ErrorModel::laplace(0.5).cf(0.0) == 1.0);
    CHECK(ErrorModel::no_error().cf(37.0) == 1.0);

    RngStream r(2);
    for (int i = 0; i < 100; ++i) {
        const double t = 20.0 * (r.uniform() - 0.5);
        CHECK(sg2.cf(t) == sg2.cf(-t));
        CHECK(sg2.cf(t) * std::pow(1.0 + t * t, 1.0) == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(sg2.cf(t) > 0.0);
        CHECK(sg2.cf(t) <= 1.0);
    }
}

TEST_CASE("tail normalization bounded above and below") {
    for (const auto& m : {ErrorModel::sym_gamma(0.4), ErrorModel::sym_gamma(2.0),
                          ErrorModel::laplace(1.5)}) {
        for (double t : {1.0, 10.0, 1e3, 1e6}) {
            const double v = m.cf(t) * std::pow(1.0 + t, m.tail_exponent());
            CHECK(v > 0.05);
            CHECK(v < 20.0);
        }
    }
}

TEST_CASE("even moments") {
    const auto sg2 = ErrorModel::sym_gamma(2.0);
    CHECK(sg2.even_moment(0) == 1.0);
    CHECK(sg2.even_moment(1) == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(sg2.even_moment(2) == doctest::Approx(24.0).epsilon(1e-14));
    CHECK(ErrorModel::sym_gamma(5.0).even_moment(1) == doctest::Approx(5.0).epsilon(1e-14));
    CHECK(ErrorModel::laplace(2.0).even_moment(1) == doctest::Approx(8.0).epsilon(1e-14));
    CHECK(ErrorModel::no_error().even_moment(3) == 0.0);
    CHECK_THROWS_AS(sg2.even_moment(-1), UnsupportedMomentError);
    CHECK_THROWS_AS(sg2.even_moment(200), UnsupportedMomentError);
}

TEST_CASE("even moments against density quadrature") {
    // E delta^2 and E delta^4 by integrating the closed-form density
    for (double alpha : {2.0, 5.0}) {
        const auto m = ErrorModel::sym_gamma(alpha);
        auto f2 = [&](double x) { return x * x * m.density(x); };
        auto f4 = [&](double x) { return x * x * x * x * m.density(x); };
        const GaussLegendre& gl = GaussLegendre::rule(32);
        const double m2 = 2.0 * detail::composite_gl(f2, 0.0, 80.0, 640, gl);
        const double m4 = 2.0 * detail::composite_gl(f4, 0.0, 80.0, 640, gl);
        CHECK(m2 == doctest::Approx(m.even_moment(1)).epsilon(1e-8));
        CHECK(m4 == doctest::Approx(m.even_moment(2)).epsilon(1e-8));
    }
}

TEST_CASE("empirical characteristic function of samples matches cf") {
    const auto m = ErrorModel::sym_gamma(2.0);
    RngStream r(77);
    const std::size_t n = 1000000;
    const auto s = m.sample(n, r);
    for (double t = -5.0; t <= 5.0; t += 1.0) {
        double c = 0.0;
        for (double x : s) c += std::cos(t * x);
        CHECK(std::abs(c / static_cast<double>(n) - m.cf(t)) < 0.01);
    }
}

TEST_CASE("samplers") {
    RngStream r(31);
    const auto zeros = ErrorModel::no_error().sample(5, r);
    CHECK(zeros == std::vector<double>{0.0, 0.0, 0.0, 0.0, 0.0});

    const std::size_t n = 100000;
    RngStream r2(32);
    const auto sg = ErrorModel::sym_gamma(2.0).sample(n, r2);
    double mean = 0.0;
    for (double x : sg) mean += x;
    mean /= static_cast<double>(n);
    CHECK(std::abs(mean) < 4.0 * std::sqrt(2.0 / static_cast<double>(n)));

    RngStream r3(33);
    const auto nm = TargetModel::std_normal().sample(n, r3);
    double m1 = 0.0, m2 = 0.0;
    for (double x : nm) {
        m1 += x;
        m2 += x * x;
    }
    m1 /= static_cast<double>(n);
    const double var = m2 / static_cast<double>(n) - m1 * m1;
    CHECK(std::abs(var - 1.0) < 4.0 * std::sqrt(2.0 / static_cast<double>(n)));
}

TEST_CASE("error samples are symmetric about zero") {
    // two-sample KS check: first half vs negated second half
    for (const auto& m : {ErrorModel::sym_gamma(2.0), ErrorModel::laplace(1.0)}) {
        RngStream r(55);
        const std::size_t n = 40000;
        auto s = m.sample(n, r);
        std::vector<double> a(s.begin(), s.begin() + n / 2);
        std::vector<double> b(s.begin() + n / 2, s.end());
        for (auto& x : b) x = -x;
        const double d = oracle::ks_distance(a, b);
        CHECK(d < 2.2 * std::sqrt(2.0 / (n / 2.0)));
    }
}

TEST_CASE("target models normalize") {
    const GaussLegendre& gl = GaussLegendre::rule(32);
    for (const auto& t : {TargetModel::std_normal(), TargetModel::normal_mixture(), TargetModel::gamma2()}) {
        auto f = [&](double x) { return t.density(x); };
        const double mass = detail::composite_gl(f, -40.0, 40.0, 800, gl);
        CHECK(mass == doctest::Approx(1.0).epsilon(1e-9));
        CHECK(t.cdf(-1e9) == doctest::Approx(0.0).epsilon(1e-12));
        CHECK(t.cdf(1e9) == doctest::Approx(1.0).epsilon(1e-12));
        double prev = 0.0;
        for (double x = -12.0; x <= 12.0; x += 0.25) {
            CHECK(t.cdf(x) >= prev - 1e-15);
            prev = t.cdf(x);
        }
    }
}

TEST_CASE("target sampler moments at fixed seed") {
    for (const auto& t : {TargetModel::std_normal(), TargetModel::normal_mixture(), TargetModel::gamma2()}) {
        RngStream r(404);
        const std::size_t n = 100000;
        const auto s = t.sample(n, r);
        double m1 = 0.0, m2 = 0.0;
        for (double x : s) {
            m1 += x;
            m2 += x * x;
        }
        m1 /= static_cast<double>(n);
        const double var = m2 / static_cast<double>(n) - m1 * m1;
        CHECK(std::abs(m1 - t.mean()) < 4.0 * std::sqrt(t.variance() / static_cast<double>(n)));
        CHECK(std::abs(var - t.variance()) < 4.0 * t.variance() * std::sqrt(3.0 / static_cast<double>(n)) + 0.05);
    }
}

TEST_CASE("target quantiles invert the cdf") {
    for (const auto& t : {TargetModel::std_normal(), TargetModel::normal_mixture(), TargetModel::gamma2()}) {
        for (double u : {0.05, 0.4, 0.5, 0.7, 0.99})
            CHECK(t.cdf(t.quantile(u)) == doctest::Approx(u).epsilon(1e-9));
    }
}

TEST_CASE("roughness values") {
    CHECK(target_roughness(TargetModel::std_normal()) ==
          doctest::Approx(1.0 / (4.0 * std::sqrt(M_PI))).epsilon(1e-12));
    CHECK(target_roughness(TargetModel::gamma2()) == doctest::Approx(0.25).epsilon(1e-12));

    // gamma2 against quadrature of the squared derivative
    auto fp2 = [](double x) {
        const double d = (1.0 - x) * std::exp(-x);
        return d * d;
    };
    const GaussLegendre& gl = GaussLegendre::rule(32);
    const double quad = detail::composite_gl(fp2, 0.0, 80.0, 800, gl);
    CHECK(quad == doctest::Approx(0.25).epsilon(1e-8));

    // N(0, sigma=2) custom: sigma^3 scaling of the normal formula
    const double sigma = 2.0;
    auto density = [sigma](double x) {
        return std::exp(-0.5 * x * x / (sigma * sigma)) / (sigma * std::sqrt(2.0 * M_PI));
    };
    auto cdf = [sigma](double x) { return 0.5 * std::erfc(-x / (sigma * std::sqrt(2.0))); };
    const auto custom = TargetModel::custom(density, cdf,
                                            [sigma](RngStream& r) { return sigma * r.normal(); });
    CHECK(target_roughness(custom) ==
          doctest::Approx(1.0 / (4.0 * std::sqrt(M_PI) * 8.0)).epsilon(1e-5));
}

TEST_CASE("smoothness classification across the 1/2 boundary") {
    for (double alpha : {0.1, 0.3, 0.45}) {
        const auto rep = smoothness_class(ErrorModel::sym_gamma(alpha));
        CHECK(rep.verdict == SmoothnessVerdict::Feasible);
        CHECK(rep.partial_integral > 0.0);
    }
    for (double alpha : {0.55, 1.0, 2.0, 6.0})
        CHECK(smoothness_class(ErrorModel::sym_gamma(alpha)).verdict == SmoothnessVerdict::Infeasible);
}

TEST_CASE("smoothness classification, moment mode") {
    CHECK(smoothness_class(ErrorModel::sym_gamma(1.6), 1.5).verdict == SmoothnessVerdict::Feasible);
    CHECK(smoothness_class(ErrorModel::sym_gamma(2.5), 1.5).verdict == SmoothnessVerdict::Infeasible);
}

TEST_CASE("spec parsing") {
    CHECK(parse_error_spec("SymGamma:2.0").kind() == ErrorModel::Kind::SymGamma);
    CHECK(parse_error_spec("LAPLACE:0.5").param() == 0.5);
    CHECK(parse_error_spec("noerror").kind() == ErrorModel::Kind::NoError);
    CHECK_THROWS_AS(parse_error_spec("symgamma"), std::invalid_argument);
    CHECK_THROWS_AS(parse_error_spec("symgamma:-1"), std::invalid_argument);
    CHECK_THROWS_AS(parse_error_spec("cauchy:1"), std::invalid_argument);
    CHECK(parse_target_spec("Normal").kind() == TargetModel::Kind::StdNormal);
    CHECK(parse_target_spec("MIXTURE").kind() == TargetModel::Kind::NormalMixture);
    CHECK(parse_target_spec("gamma2").kind() == TargetModel::Kind::Gamma2);
    CHECK_THROWS_AS(parse_target_spec("weibull"), std::invalid_argument);
}

TEST_CASE("symgamma density closed form") {
    // alpha = 2 is Laplace(1)
    const auto sg2 = ErrorModel::sym_gamma(2.0);
    for (double x : {0.0, 0.3, 1.0, 4.0})
        CHECK(sg2.density(x) == doctest::Approx(0.5 * std::exp(-std::abs(x))).epsilon(1e-10));
}

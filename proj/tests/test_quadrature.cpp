#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <functional>

#include "deconv/quadrature.hpp"
#include "oracles.hpp"

using namespace deconv;

TEST_CASE("gauss-legendre exactness") {
    const GaussLegendre& gl = GaussLegendre::rule(16);
    // degree-31 polynomial integrated exactly
    auto f = [](double x) { return 31.0 * std::pow(x, 30.0); };
    CHECK(gl.integrate(f, -1.0, 1.0) == doctest::Approx(2.0).epsilon(1e-13));
    auto g = [](double x) { return std::exp(x); };
    CHECK(gl.integrate(g, 0.0, 1.0) == doctest::Approx(std::exp(1.0) - 1.0).epsilon(1e-14));
}

TEST_CASE("sine integral basics") {
    QuadratureSpec spec;
    auto one = [](double) { return 1.0; };
    CHECK(sine_integral(one, 0.0, 100.0, spec) == 0.0);
    // Dirichlet
    CHECK(sine_integral(one, 1.0, 1e5, spec) == doctest::Approx(M_PI / 2).epsilon(1e-3));
    // antisymmetry in u
    auto g = [](double t) { return std::exp(-0.1 * t); };
    CHECK(sine_integral(g, 0.7, 50.0, spec) == doctest::Approx(-sine_integral(g, -0.7, 50.0, spec)).epsilon(1e-12));
}

TEST_CASE("sine integral against a dense trapezoid oracle") {
    QuadratureSpec spec;
    auto g = [](double t) { return t <= 1.0 ? std::pow(1.0 - t * t, 2.0) : 0.0; };
    const double got = sine_integral(g, 0.7, 1.0, spec);
    const double want = oracle::trapezoid(
        [&](double t) { return t < 1e-12 ? 0.7 * g(t) : std::sin(0.7 * t) / t * g(t); }, 0.0, 1.0,
        100000);
    CHECK(got == doctest::Approx(want).epsilon(1e-8));
}

TEST_CASE("huge-range truncated sine integral matches the analytic truncation error") {
    QuadratureSpec spec;
    auto one = [](double) { return 1.0; };
    // int_0^T sin(t)/t dt = pi/2 - cos(T)/T - sin(T)/T^2 + O(T^-3)
    for (double T : {1e6, 1e7}) {
        const double got = sine_integral(one, 1.0, T, spec);
        const double want = M_PI / 2 - std::cos(T) / T - std::sin(T) / (T * T);
        CHECK(got == doctest::Approx(want).epsilon(1e-9));
    }
}

TEST_CASE("cosine integral") {
    QuadratureSpec spec;
    auto one = [](double) { return 1.0; };
    CHECK(cosine_integral(one, 5.0, 0.0, 1.0, spec) == doctest::Approx(std::sin(5.0) / 5.0).epsilon(1e-12));
    auto poly = [](double t) { return (1.0 - t * t) * (1.0 - t * t); };
    const double want = oracle::trapezoid([&](double t) { return std::cos(13.0 * t) * poly(t); },
                                          0.0, 1.0, 400000);
    CHECK(cosine_integral(poly, 13.0, 0.0, 1.0, spec) == doctest::Approx(want).epsilon(1e-9));
}

TEST_CASE("refinement detects panel dependence") {
    QuadratureSpec spec;
    // refining panels_per_period 4 -> 8 moves the result by less than rel_tol
    auto g = [](double t) { return 1.0 / (1.0 + t); };
    QuadratureSpec fine = spec;
    fine.panels_per_period = 8;
    for (double u : {0.3, 2.0, 11.0}) {
        const double a = sine_integral(g, u, 30.0, spec);
        const double b = sine_integral(g, u, 30.0, fine);
        CHECK(std::abs(a - b) <= std::max(10.0 * spec.rel_tol * std::abs(b), 1e-9));
    }
}

TEST_CASE("alternating lobe tail") {
    QuadratureSpec spec;
    // int_a^inf sin(t)/t dt, compared against a long direct integral
    auto m = [](double t) { return 1.0 / t; };
    const double a = 7.0;
    const double tail = detail::alternating_lobe_tail(m, 1.0, a, spec);
    const double direct = sine_integral([](double) { return 1.0; }, 1.0, 4000.0, spec) -
                          detail::oscillatory_panels(
                              [&](double t) { return std::sin(t) / t; }, 1.0, 0.0, a, spec);
    CHECK(tail == doctest::Approx(direct).epsilon(1e-4));
}

TEST_CASE("geometric blocks") {
    QuadratureSpec spec;
    auto f = [](double t) { return 1.0 / (t * t); };
    CHECK(geometric_blocks(f, 1.0, 1e18, spec) == doctest::Approx(1.0).epsilon(1e-8));
    auto bad = [](double t) { return t * t; };
    CHECK_THROWS_AS(geometric_blocks(bad, 1.0, 1e18, spec), DivergentIntegralError);
}

TEST_CASE("quadrature spec validation") {
    QuadratureSpec s;
    s.panels_per_period = 1;
    CHECK_THROWS_AS(s.validate(), std::invalid_argument);
    QuadratureSpec s2;
    s2.rel_tol = 0.0;
    CHECK_THROWS_AS(s2.validate(), std::invalid_argument);
}

TEST_CASE("quadrature error carries both estimates") {
    const QuadratureError err("test", 1.0, 2.0);
    CHECK(err.previous_estimate() == 1.0);
    CHECK(err.last_estimate() == 2.0);
}

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "deconv/errors.hpp"
#include "deconv/transforms.hpp"
#include "oracles.hpp"

using namespace deconv;

TEST_CASE("L1 at the origin is exactly one half") {
    WeightContext ctx(Kernel{4, 2}, ErrorModel::sym_gamma(2.0), 0.6);
    CHECK(l1_weight(ctx, 0.0) == 0.5);
    WeightContext ctx0(Kernel{4, 2}, ErrorModel::no_error(), 0.0);
    CHECK(l1_weight(ctx0, 0.0) == 0.5);
}

TEST_CASE("NoError h=0 weight is the unit step") {
    WeightContext ctx(Kernel{4, 2}, ErrorModel::no_error(), 0.0);
    CHECK(l1_weight(ctx, 3.0) == doctest::Approx(1.0).epsilon(1e-3));
    for (double u : {0.1, 1.0, 10.0}) {
        CHECK(std::abs(l1_weight(ctx, u) - 1.0) < 1e-3);
        CHECK(std::abs(l1_weight(ctx, -u) - 0.0) < 1e-3);
    }
}

TEST_CASE("Riemann-Lebesgue limits") {
    WeightContext ctx(Kernel{4, 2}, ErrorModel::sym_gamma(2.0), 0.6);
    CHECK(std::abs(l1_weight(ctx, -1e4)) < 1e-3);
    for (const auto& err : {ErrorModel::sym_gamma(2.0), ErrorModel::sym_gamma(6.0),
                            ErrorModel::laplace(1.0), ErrorModel::no_error()}) {
        for (double h : {0.2, 1.0}) {
            WeightContext c(Kernel{4, 2}, err, h);
            const double far = 1e4 * h;
            CHECK(std::abs(l1_weight(c, far) - 1.0) < 0.01);
            CHECK(std::abs(l1_weight(c, -far)) < 0.01);
        }
    }
}

TEST_CASE("L1 against a dense trapezoid oracle") {
    WeightContext ctx(Kernel{4, 2}, ErrorModel::sym_gamma(2.0), 0.6);
    auto integrand = [&](double t) {
        if (t < 1e-12) return 1.3 * ctx.psi(t);
        return std::sin(1.3 * t) / t * ctx.psi(t);
    };
    const double want = 0.5 + oracle::trapezoid(integrand, 0.0, 1.0 / 0.6, 2000000) / M_PI;
    CHECK(l1_weight(ctx, 1.3) == doctest::Approx(want).epsilon(1e-7));
}

TEST_CASE("L against a dense trapezoid oracle and the NoError kernel identity") {
    WeightContext ctx(Kernel{4, 2}, ErrorModel::sym_gamma(2.0), 0.6);
    auto integrand = [&](double v) {
        return std::cos(1.3 * v) * kft(ctx.kernel(), v) / ctx.error().cf(v / 0.6);
    };
    const double want = oracle::trapezoid(integrand, 0.0, 1.0, 2000000) / M_PI;
    CHECK(l_weight(ctx, 1.3) == doctest::Approx(want).epsilon(1e-7));

    WeightContext ctx0(Kernel{4, 2}, ErrorModel::no_error(), 0.7);
    for (double u : {0.0, 0.4, 2.0, 9.0})
        CHECK(l_weight(ctx0, u) == doctest::Approx(kernel_real(ctx0.kernel(), u)).epsilon(1e-8));
}

TEST_CASE("consistency of L and L1: the density weight integrates to the cdf weight") {
    WeightContext ctx(Kernel{4, 2}, ErrorModel::sym_gamma(2.0), 0.6);
    const double h = ctx.h();
    RngStream r(8);
    for (int i = 0; i < 5; ++i) {
        const double a = -5.0 + 10.0 * r.uniform();
        const double b = a + 4.0 * r.uniform();
        auto f = [&](double v) { return l_weight(ctx, v / h) / h; };
        const double integral = oracle::simpson(f, a, b, 4000);
        CHECK(integral == doctest::Approx(l1_weight(ctx, b) - l1_weight(ctx, a)).epsilon(1e-5));
    }
}

TEST_CASE("total mass of the density weight") {
    // int L = 1, taken through the verified L/L1 consistency: the mass over
    // [-U, U] is L1(U) - L1(-U), and both ends are within the
    // Riemann-Lebesgue bound of their limits at U = 1e4 h.
    for (double h : {0.3, 0.8}) {
        WeightContext ctx(Kernel{4, 2}, ErrorModel::sym_gamma(2.0), h);
        const double U = 1e4 * h;
        const double mass = l1_weight(ctx, U) - l1_weight(ctx, -U);
        CHECK(mass == doctest::Approx(1.0).epsilon(1e-6));
    }
}

TEST_CASE("panels-per-period refinement stability") {
    QuadratureSpec coarse;  // 4
    QuadratureSpec fine;
    fine.panels_per_period = 8;
    int checked = 0;
    for (double h : {0.2, 0.6, 1.4}) {
        WeightContext c4(Kernel{4, 2}, ErrorModel::sym_gamma(2.0), h, coarse);
        WeightContext c8(Kernel{4, 2}, ErrorModel::sym_gamma(2.0), h, fine);
        for (double u = -6.0; u <= 6.0; u += 0.37) {
            CHECK(std::abs(l1_weight(c4, u) - l1_weight(c8, u)) < 1e-7);
            ++checked;
        }
    }
    CHECK(checked >= 96);
}

TEST_CASE("h = 0 gate") {
    CHECK_THROWS_AS(WeightContext(Kernel{4, 2}, ErrorModel::sym_gamma(2.0), 0.0),
                    UnsupportedBandwidthError);
    WeightContext warn(Kernel{4, 2}, ErrorModel::sym_gamma(0.7), 0.0);
    CHECK(warn.zero_bandwidth_warning());
    WeightContext ok(Kernel{4, 2}, ErrorModel::sym_gamma(0.4), 0.0);
    CHECK_FALSE(ok.zero_bandwidth_warning());
    CHECK(ok.zero_bw_tail_coeff() > 0.0);
    WeightContext noerr(Kernel{4, 2}, ErrorModel::no_error(), 0.0);
    CHECK(noerr.zero_bw_tail_coeff() == doctest::Approx(1e-6));
    CHECK_THROWS_AS(WeightContext(Kernel{4, 2}, ErrorModel::sym_gamma(2.0), -0.1),
                    UnsupportedBandwidthError);
}

TEST_CASE("density weight requires h > 0") {
    WeightContext ctx(Kernel{4, 2}, ErrorModel::no_error(), 0.0);
    CHECK_THROWS_AS(l_weight(ctx, 1.0), UnsupportedBandwidthError);
}

TEST_CASE("L1 table matches exact weights") {
    WeightContext ctx(Kernel{4, 2}, ErrorModel::sym_gamma(2.0), 0.6);
    L1Table table(ctx, 30.0);
    double worst = 0.0;
    for (double u = -29.0; u <= 29.0; u += 0.231)
        worst = std::max(worst, std::abs(table(u) - l1_weight(ctx, u)));
    CHECK(worst < 1e-6);
    // outside the table: exact fallback
    CHECK(table(55.0) == l1_weight(ctx, 55.0));
    // odd symmetry of L1 - 1/2 carried by the table
    for (double u : {0.37, 2.11, 14.9})
        CHECK(table(u) - 0.5 == doctest::Approx(0.5 - table(-u)).epsilon(1e-10));
}

TEST_CASE("L1 table rejects h = 0") {
    WeightContext ctx(Kernel{4, 2}, ErrorModel::no_error(), 0.0);
    CHECK_THROWS_AS(L1Table(ctx, 10.0), UnsupportedBandwidthError);
}

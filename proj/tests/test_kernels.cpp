#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "deconv/kernels.hpp"
#include "deconv/quadrature.hpp"
#include "deconv/rng.hpp"

using namespace deconv;

TEST_CASE("fourier transform values") {
    Kernel k42{4, 2};
    CHECK(kft(k42, 0.0) == 1.0);
    CHECK(kft(k42, 1.2) == 0.0);
    CHECK(kft(k42, -1.2) == 0.0);
    CHECK(kft(k42, 0.5) == doctest::Approx(0.87890625).epsilon(1e-15));
    RngStream r(3);
    for (int i = 0; i < 100; ++i) {
        const double t = 3.0 * (r.uniform() - 0.5);
        CHECK(kft(k42, t) == kft(k42, -t));
        if (std::abs(t) <= 1.0) CHECK(std::abs(kft(k42, t)) <= 1.0);
    }
}

TEST_CASE("s-fold zero at the support edge") {
    for (const Kernel k : {Kernel{2, 1}, Kernel{2, 2}, Kernel{4, 2}, Kernel{4, 3}}) {
        for (double eps : {1e-3, 1e-4}) {
            const double bound = std::pow(1.1 * k.r * eps, k.s);
            CHECK(kft(k, 1.0 - eps) <= bound);
        }
    }
}

TEST_CASE("kappa2 symbolic values") {
    CHECK(kappa2(Kernel{2, 2}) == 4.0);
    CHECK(kappa2(Kernel{2, 1}) == 2.0);
    CHECK(kappa2(Kernel{4, 2}) == 0.0);
    CHECK(kappa2(Kernel{6, 1}) == 0.0);
}

namespace {

// int x^2 K(x) dx, numerically: direct panels to x0, then the alternating
// half-lobe tail (K oscillates with period ~2pi) summed with averaging,
// truncated at |x| = 500.
double numeric_second_moment(const Kernel& k) {
    const GaussLegendre& gl = GaussLegendre::rule(16);
    auto f = [&](double x) { return x * x * kernel_real(k, x); };
    const double x0 = 40.0;
    double acc = detail::composite_gl(f, 0.0, x0, 160, gl);
    // half-lobes of length pi up to 500, accelerated
    const int lobes = static_cast<int>((500.0 - x0) / M_PI);
    std::vector<double> partial(lobes);
    double run = 0.0;
    for (int i = 0; i < lobes; ++i) {
        run += gl.integrate(f, x0 + M_PI * i, x0 + M_PI * (i + 1));
        partial[static_cast<std::size_t>(i)] = run;
    }
    for (int lev = 1; lev < lobes; ++lev)
        for (int i = 0; i + lev < lobes; ++i)
            partial[static_cast<std::size_t>(i)] =
                0.5 * (partial[static_cast<std::size_t>(i)] + partial[static_cast<std::size_t>(i) + 1]);
    return 2.0 * (acc + partial[0]);
}

}  // namespace

TEST_CASE("kappa2 against numeric second moment") {
    CHECK(numeric_second_moment(Kernel{2, 1}) == doctest::Approx(2.0).epsilon(5e-5));
    CHECK(numeric_second_moment(Kernel{2, 2}) == doctest::Approx(4.0).epsilon(2.5e-5));
    CHECK(std::abs(numeric_second_moment(Kernel{4, 2})) < 1e-3);
}

TEST_CASE("real-space kernel") {
    Kernel k{4, 2};
    // K(0) = (1/pi)(1 - 2/5 + 1/9)
    CHECK(kernel_real(k, 0.0) == doctest::Approx((1.0 - 0.4 + 1.0 / 9.0) / M_PI).epsilon(1e-12));
    RngStream r(11);
    for (int i = 0; i < 20; ++i) {
        const double x = 60.0 * (r.uniform() - 0.5);
        CHECK(kernel_real(k, x) == kernel_real(k, -x));
    }
    // unit mass over [-200, 200]
    const GaussLegendre& gl = GaussLegendre::rule(16);
    auto f = [&](double x) { return kernel_real(k, x); };
    const double mass = 2.0 * detail::composite_gl(f, 0.0, 200.0, 512, gl);
    CHECK(mass == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("constructor validation") {
    CHECK_THROWS_AS(Kernel(3, 2), std::invalid_argument);
    CHECK_THROWS_AS(Kernel(0, 2), std::invalid_argument);
    CHECK_THROWS_AS(Kernel(2, 0), std::invalid_argument);
}

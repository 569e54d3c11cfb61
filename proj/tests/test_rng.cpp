#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <set>

#include "deconv/rng.hpp"

using namespace deconv;

TEST_CASE("same seed, same sequence") {
    RngStream a(42), b(42);
    for (int i = 0; i < 100; ++i) CHECK(a.uniform() == b.uniform());
    RngStream c(42), d(42);
    for (int i = 0; i < 50; ++i) CHECK(c.normal() == d.normal());
}

TEST_CASE("derived streams differ across runs and roles") {
    RngStream a = RngStream::derive(7, 0, 0);
    RngStream b = RngStream::derive(7, 1, 0);
    RngStream c = RngStream::derive(7, 0, 1);
    std::set<std::uint64_t> firsts{a.raw(), b.raw(), c.raw()};
    CHECK(firsts.size() == 3);
}

TEST_CASE("uniform stays inside the open interval") {
    RngStream r(1);
    for (int i = 0; i < 100000; ++i) {
        const double u = r.uniform();
        CHECK(u > 0.0);
        CHECK(u < 1.0);
    }
}

TEST_CASE("normal moments") {
    RngStream r(123);
    const int n = 200000;
    double s = 0.0, s2 = 0.0;
    for (int i = 0; i < n; ++i) {
        const double x = r.normal();
        s += x;
        s2 += x * x;
    }
    const double mean = s / n, var = s2 / n - mean * mean;
    CHECK(std::abs(mean) < 4.0 / std::sqrt(static_cast<double>(n)));
    CHECK(std::abs(var - 1.0) < 4.0 * std::sqrt(2.0 / n));
}

TEST_CASE("gamma moments for shape above and below 1") {
    for (double shape : {0.4, 2.5}) {
        RngStream r(99);
        const int n = 200000;
        double s = 0.0, s2 = 0.0;
        for (int i = 0; i < n; ++i) {
            const double x = r.gamma(shape);
            s += x;
            s2 += x * x;
        }
        const double mean = s / n, var = s2 / n - mean * mean;
        CHECK(std::abs(mean - shape) < 4.0 * std::sqrt(shape / n));
        CHECK(std::abs(var - shape) < 0.05 * shape + 0.02);
    }
}

TEST_CASE("exponential mean") {
    RngStream r(5);
    const int n = 100000;
    double s = 0.0;
    for (int i = 0; i < n; ++i) s += r.exponential();
    CHECK(std::abs(s / n - 1.0) < 4.0 / std::sqrt(static_cast<double>(n)));
}

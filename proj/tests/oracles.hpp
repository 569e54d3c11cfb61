#pragma once

// Brute-force reference integrators used as independent oracles. These are
// deliberately naive (dense trapezoid / Simpson sums) and share no code
// with the quadrature engine they check.

#include <cmath>
#include <functional>
#include <vector>

namespace oracle {

inline double trapezoid(const std::function<double(double)>& f, double a, double b, long n) {
    const double h = (b - a) / static_cast<double>(n);
    double acc = 0.5 * (f(a) + f(b));
    for (long i = 1; i < n; ++i) acc += f(a + h * static_cast<double>(i));
    return acc * h;
}

inline double simpson(const std::function<double(double)>& f, double a, double b, long n) {
    if (n % 2 != 0) ++n;
    const double h = (b - a) / static_cast<double>(n);
    double acc = f(a) + f(b);
    for (long i = 1; i < n; ++i) acc += (i % 2 == 1 ? 4.0 : 2.0) * f(a + h * static_cast<double>(i));
    return acc * h / 3.0;
}

//! Running maximum, the long way.
inline std::vector<double> running_max(const std::vector<double>& v) {
    std::vector<double> out;
    out.reserve(v.size());
    double m = -1e300;
    for (double x : v) {
        if (x > m) m = x;
        out.push_back(m);
    }
    return out;
}

//! Kolmogorov-Smirnov distance between two samples.
inline double ks_distance(std::vector<double> a, std::vector<double> b) {
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    double d = 0.0;
    std::size_t i = 0, j = 0;
    while (i < a.size() && j < b.size()) {
        if (a[i] <= b[j])
            ++i;
        else
            ++j;
        const double fa = static_cast<double>(i) / static_cast<double>(a.size());
        const double fb = static_cast<double>(j) / static_cast<double>(b.size());
        d = std::max(d, std::abs(fa - fb));
    }
    return d;
}

//! Empirical CDF of `data` at x.
inline double ecdf(const std::vector<double>& data, double x) {
    std::size_t c = 0;
    for (double v : data)
        if (v <= x) ++c;
    return static_cast<double>(c) / static_cast<double>(data.size());
}

}  // namespace oracle

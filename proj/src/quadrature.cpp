#include "deconv/quadrature.hpp"

#include <map>
#include <mutex>

namespace deconv {

GaussLegendre::GaussLegendre(int n) : x_(static_cast<std::size_t>(n)), w_(static_cast<std::size_t>(n)) {
    // Newton iteration on Legendre polynomials, nodes symmetric about 0.
    const int m = (n + 1) / 2;
    for (int i = 0; i < m; ++i) {
        double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
        double pp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = x;
            for (int j = 2; j <= n; ++j) {
                const double p2 = ((2.0 * j - 1.0) * x * p1 - (j - 1.0) * p0) / j;
                p0 = p1;
                p1 = p2;
            }
            pp = n * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / pp;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        x_[static_cast<std::size_t>(i)] = -x;
        x_[static_cast<std::size_t>(n - 1 - i)] = x;
        const double w = 2.0 / ((1.0 - x * x) * pp * pp);
        w_[static_cast<std::size_t>(i)] = w;
        w_[static_cast<std::size_t>(n - 1 - i)] = w;
    }
}

const GaussLegendre& GaussLegendre::rule(int n) {
    static std::map<int, GaussLegendre> cache;
    static std::mutex mutex;
    std::lock_guard<std::mutex> lock(mutex);
    auto it = cache.find(n);
    if (it == cache.end()) it = cache.emplace(n, GaussLegendre(n)).first;
    return it->second;
}

}  // namespace deconv

#pragma once

#include <stdexcept>

namespace deconv {

//! Kernel with polynomial, compactly supported Fourier transform
//!     K^Ft(t) = (1 - t^r)^s on |t| <= 1, zero outside,
//! where r >= 2 is even and s >= 1.
struct Kernel {
    int r = 4;
    int s = 2;

    Kernel() = default;
    Kernel(int r_, int s_) : r(r_), s(s_) {
        if (r < 2 || r % 2 != 0) throw std::invalid_argument("kernel r must be an even integer >= 2");
        if (s < 1) throw std::invalid_argument("kernel s must be an integer >= 1");
    }
};

//! K^Ft(t), exact polynomial evaluation.
double kft(const Kernel& k, double t);

//! kappa2 = int x^2 K(x) dx = -(K^Ft)''(0): 2s for r = 2, zero for r >= 4.
double kappa2(const Kernel& k);

//! Real-space kernel K(x) = (1/pi) int_0^1 cos(tx) K^Ft(t) dt.
double kernel_real(const Kernel& k, double x);

}  // namespace deconv

#pragma once

#include <stdexcept>
#include <string>

namespace deconv {

//! Oscillatory quadrature failed to stabilize; carries the last two estimates.
class QuadratureError : public std::runtime_error {
public:
    QuadratureError(const std::string& what, double previous, double last)
        : std::runtime_error(what + " (previous=" + std::to_string(previous) +
                             ", last=" + std::to_string(last) + ")"),
          previous_(previous),
          last_(last) {}

    double previous_estimate() const { return previous_; }
    double last_estimate() const { return last_; }

private:
    double previous_;
    double last_;
};

class UnsupportedMomentError : public std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

class UnsupportedBandwidthError : public std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

class DivergentIntegralError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

class NoAsymptoteError : public std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

class NoiseDominatesError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

class SpanExhaustedError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

class NonIntegrableTailError : public std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

class DegenerateDistributionError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

class PoleError : public std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

}  // namespace deconv

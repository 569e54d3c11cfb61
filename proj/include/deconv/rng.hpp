#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace deconv {

//! Deterministic random stream.
//!
//! Wraps std::mt19937_64 (whose output sequence is fully specified by the
//! standard) and draws all variates through portable transforms, so a given
//! (seed, run, role) triple produces the same numbers on every platform.
//! Replication-level parallelism derives one independent stream per
//! (run, role) pair and never shares engine state across threads.
class RngStream {
public:
    explicit RngStream(std::uint64_t seed);

    //! Stream for replication `run` in role `role` (0 = target draws,
    //! 1 = error draws, ...) of an experiment seeded with `seed`.
    static RngStream derive(std::uint64_t seed, std::uint64_t run, std::uint64_t role);

    //! Uniform on (0, 1); never returns an exact 0 or 1.
    double uniform();

    //! Standard normal via the Marsaglia polar method (one spare cached).
    double normal();

    //! Gamma(shape, scale 1) via Marsaglia–Tsang, with the power boost
    //! for shape < 1.
    double gamma(double shape);

    //! Exponential with mean 1.
    double exponential();

    std::uint64_t raw() { return engine_(); }

private:
    std::mt19937_64 engine_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

namespace detail {
std::uint64_t splitmix64(std::uint64_t& state);
}

}  // namespace deconv

#pragma once

namespace deconv {

//! Command-line entry point (estimate | quantile | moments | resample |
//! bandwidth | simulate | rates | asymp | check-smoothness).
//! Returns 0 on success, 1 on usage errors, 2 on numerical failures.
int cli_main(int argc, const char* const* argv);

}  // namespace deconv

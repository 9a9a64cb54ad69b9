#pragma once

#include <string>

namespace fracvar {

inline constexpr const char* kVersion = "fracvar 0.1.0";

// Exit codes: 0 ok, 2 validation, 3 non-convergence, 4 invariant violation.
int run_cli(int argc, const char* const* argv);

}  // namespace fracvar

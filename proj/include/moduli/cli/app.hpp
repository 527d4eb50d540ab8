#pragma once

#include <ostream>

namespace moduli::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailed = 1;
inline constexpr int kExitUsage = 2;

/// Command-line entry point: `run <config>`, `describe`, `verify` with --seed, --out, --tol-scale.
int main_entry(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

} // namespace moduli::cli

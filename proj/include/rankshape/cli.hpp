#pragma once

#include <iosfwd>
#include <span>
#include <string>

namespace rankshape {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInputError = 1;
inline constexpr int kExitNumericalError = 2;

/// Runs one subcommand. `args` excludes the program name. Errors are reported
/// as a single JSON line on `err`.
int run_cli(std::span<const std::string> args, std::ostream& out, std::ostream& err);

}  // namespace rankshape

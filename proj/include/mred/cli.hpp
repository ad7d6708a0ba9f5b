#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace mred::cli {

/// Usage errors (unknown flag or subcommand, missing argument).
inline constexpr int kUsageExit = 2;
/// Any mred::Error or I/O failure; one "error: <code>: <message>" line on err.
inline constexpr int kFailureExit = 1;

/// args[0] is the program name.
int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int dispatch(int argc, char** argv);

}  // namespace mred::cli

#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace gravistat {

/// Entry point of the `gravistat` tool. `args` excludes the program name.
/// Subcommands: fermi, solve, trace, turning-points, count, energy,
/// validate, diagram. Returns the process exit status.
int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace gravistat

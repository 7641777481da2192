#pragma once

// Command line front end. Subcommands: solve, eig, gaffney, divcurl,
// harmonics, convergence, check-ellipticity, mesh-info.

#include <string>
#include <vector>

namespace hodge {

/// Runs one command; `args` is argv without the program name. Returns the
/// process exit code: 0 success, 2 incompatible data, 3 spectrum hit,
/// 4 config or usage error, 1 any other failure. Reports go to the
/// configured paths, stdout when none; errors are also serialized.
int run_command(const std::vector<std::string>& args);

}  // namespace hodge

#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace pbf {

/// Exit codes of the command-line front end.
enum ExitCode { exit_ok = 0, exit_validation = 1, exit_numerical = 2 };

/// Runs one subcommand; args excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace pbf

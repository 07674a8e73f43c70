#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace vinestress::cli {

/// Exit statuses of the command-line tool.
inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntime = 1;
inline constexpr int kExitUsage = 2;

/// Runs one subcommand. args excludes the program name. Progress goes to err
/// as `key=value` lines, help text to out.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

int run_cli(int argc, char** argv);

}  // namespace vinestress::cli

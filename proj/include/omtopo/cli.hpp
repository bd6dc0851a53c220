#pragma once

#include <string>
#include <vector>

namespace omtopo {

// Entry point behind the executable: parses argv, runs one subcommand,
// returns the process exit code (0 success, 1 usage/validation, 2 numeric).
int run_cli(const std::vector<std::string>& args);

}  // namespace omtopo

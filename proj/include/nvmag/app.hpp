#pragma once

#include <string>
#include <vector>

namespace nvmag::app {

// Runs one CLI invocation; `args` excludes the program name. Returns the
// process exit status: 0 success, 1 validation error, 2 numerical
// failure. Diagnostics go to stderr, data to files.
int run_cli(const std::vector<std::string>& args);

}  // namespace nvmag::app

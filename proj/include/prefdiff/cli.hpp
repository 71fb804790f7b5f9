#pragma once

namespace prefdiff {

// Full command-line entry point. Returns the process exit code:
// 0 success, 2 usage or configuration error, 3 runtime or numerical error.
int run_cli(int argc, const char* const* argv);

}  // namespace prefdiff

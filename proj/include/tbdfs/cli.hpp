#pragma once

namespace tbdfs {

// Entry point behind tools/tbdfs. Exit codes: 0 success, 1 runtime/data
// failure, 2 usage error.
int run_cli(int argc, const char* const* argv);

}  // namespace tbdfs

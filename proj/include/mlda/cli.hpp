#pragma once

namespace mlda {

/// Command-line entry point. Exit codes: 0 success, 1 usage error,
/// 2 data error, 3 solver divergence.
int run_cli(int argc, const char* const* argv);

}  // namespace mlda

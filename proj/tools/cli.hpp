#pragma once

#include <ostream>

namespace faultlab::cli {

enum ExitCode : int {
  kSuccess = 0,
  kUsage = 1,
  kGoldenFailure = 2,
  kIoError = 3,
};

/// Entry point shared by the `faultlab` binary and the CLI tests.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace faultlab::cli

#pragma once

#include <ostream>

namespace zd::cli {

enum ExitCode : int {
  kOk = 0,
  kUsage = 1,
  kInvalidInput = 2,  // parse or validation failure
  kInfeasible = 3,
  kFailure = 4,
};

/// Entry point shared by the executable and the tests.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace zd::cli

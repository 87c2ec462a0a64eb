#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace gdm::cli {

enum ExitCode : int {
  kSuccess = 0,
  kInternalError = 1,
  kNotConverged = 2,
  kValidationError = 3,
  kIoError = 4,
};

// Entry point shared by the executable and the tests; `args` excludes the
// program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace gdm::cli

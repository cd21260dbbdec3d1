#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace streampart::cli {

enum ExitCode : int {
  kSuccess = 0,
  kInvalidInput = 1,
  kModelFailure = 2,  // infeasible or unbounded model
  kInternalError = 3,
};

/// Runs one command line (args excludes the program name).
int run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err);

}  // namespace streampart::cli

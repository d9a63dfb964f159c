#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace lipgeo::cli {

enum ExitCode : int {
  kOk = 0,
  kValidationError = 1,
  kSolverError = 2,
  kVerifyFailure = 3,
};

/// Entry point of the `lipgeo` tool: integrate | compare | sweep | verify.
/// Errors are reported as one line on `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run(int argc, char** argv);

/// Writes `contents` to `path` through a temporary file and a rename.
void write_atomic(const std::string& path, const std::string& contents);

}  // namespace lipgeo::cli

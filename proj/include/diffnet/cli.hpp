#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace diffnet::cli {

enum ExitCode : int {
  kControllable = 0,
  kNotControllable = 1,
  kInconclusive = 2,
  kCertificationDisagrees = 3,
  kInputError = 64,
  kInternalError = 70,
  kIoError = 74,
};

/// Runs one command. `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace diffnet::cli

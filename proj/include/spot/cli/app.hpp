#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "spot/errors.hpp"

namespace spot::cli {

// Process exit status per error family.
enum ExitCode : int {
  kExitOk = 0,
  kExitOther = 1,
  kExitUsage = 2,
  kExitConfig = 3,
  kExitIo = 4,
  kExitFormat = 5,
  kExitDimension = 6,
  kExitNumeric = 7,
  kExitContract = 8,
  kExitShape = 9,
  kExitEmptySupport = 10,
};

int exit_code_for(ErrorKind kind);

// error: kind=<family> code=<exit code> message="<text, quotes escaped>"
std::string error_line(const std::string& kind, int code, const std::string& message);

// Runs one command line (without the program name). Results go to `out`,
// the single error line to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace spot::cli

#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace vrdkit::cli {

enum ExitStatus : int {
  kSuccess = 0,
  kFindings = 1,   // lint --strict found something
  kUsage = 2,
  kDataError = 3,  // parse failure, aborted script, failed step
  kIoError = 4,
};

/// Runs one command line (args[0] is the program name). All normal output
/// goes to `out`, diagnostics and usage text to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace vrdkit::cli

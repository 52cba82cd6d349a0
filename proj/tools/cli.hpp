#ifndef VARSIG_TOOLS_CLI_HPP
#define VARSIG_TOOLS_CLI_HPP

#include <ostream>
#include <string>
#include <vector>

namespace varsig::cli {

enum ExitCode : int { kOk = 0, kInputError = 2, kConfigError = 3, kNumericalError = 4 };

/// Runs the tool on `args` (program name excluded) and returns the exit code.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace varsig::cli

#endif

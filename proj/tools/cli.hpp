#ifndef SEGTAG_TOOLS_CLI_HPP_
#define SEGTAG_TOOLS_CLI_HPP_

#include <iosfwd>
#include <string>
#include <vector>

namespace segtag::cli {

enum ExitCode : int {
  kOk = 0,
  kInputError = 1,   // unreadable or malformed input data
  kConfigError = 2,  // bad flags, config values or mismatched inputs
  kModelError = 3,   // checkpoint cannot be read or written
};

// Runs one subcommand. args[0] is the program name. "-" as a file name
// means `in` for inputs and `out` for outputs; messages go to `err`.
int Run(const std::vector<std::string>& args, std::istream& in, std::ostream& out,
        std::ostream& err);

}  // namespace segtag::cli

#endif  // SEGTAG_TOOLS_CLI_HPP_

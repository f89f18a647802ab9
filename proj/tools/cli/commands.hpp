#ifndef ETFP_CLI_COMMANDS_HPP_
#define ETFP_CLI_COMMANDS_HPP_

#include <iosfwd>
#include <string>
#include <vector>

namespace etfp::cli {

// Runs one invocation; `args` excludes the program name. Returns the exit
// status: 0 on success, 1 on a runtime failure, 2 on a usage error. Failures
// print a single `etfp: error: ...` line to `err`.
int run(const std::vector<std::string> &args, std::ostream &out, std::ostream &err);

}  // namespace etfp::cli

#endif  // ETFP_CLI_COMMANDS_HPP_

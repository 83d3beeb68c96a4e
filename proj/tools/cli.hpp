#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace vpcircle::cli {

// Runs the command line `args` (args[0] is the program name). Returns the
// process exit code: 0 on success, 2 for input errors, 3 for infeasible or
// degenerate problems.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace vpcircle::cli

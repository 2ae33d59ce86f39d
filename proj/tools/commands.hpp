#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace cvdense::cli {

/// Runs the command line `args` (without the program name). Returns the exit
/// code: 0 on success, 1 on domain or numeric errors, 2 on usage errors.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace cvdense::cli

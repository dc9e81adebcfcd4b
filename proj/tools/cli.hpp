#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace hinglish::cli {

/// Runs one command line (without the program name). Data goes to `out`,
/// logs and diagnostics to `err`. Returns 0 on success, 1 on an operational
/// error and 2 on a usage error.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace hinglish::cli

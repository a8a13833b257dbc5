#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace gps::cli {

enum ExitCode : int { kOk = 0, kUsage = 1, kValidation = 2, kNumerical = 3 };

// args excludes the program name. Streams stand in for stdin/stdout/stderr
// so that the front end can be driven in-process.
int run(const std::vector<std::string>& args, std::istream& in, std::ostream& out,
        std::ostream& err);

}  // namespace gps::cli

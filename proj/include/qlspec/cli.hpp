#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace qlspec::cli {

enum ExitCode : int { kSuccess = 0, kValidationFailure = 1, kCheckFailure = 2, kIoFailure = 3 };

// Runs the qlspec command line. args excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace qlspec::cli

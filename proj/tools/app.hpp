#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace hdflow::cli {

// Whole command line, program name first. Returns the process exit code.
int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace hdflow::cli

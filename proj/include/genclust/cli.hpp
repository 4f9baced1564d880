#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace genclust {

/// Entry point of the `genclust` tool. `args` excludes the program name.
/// Returns the process exit code: 0 success, 1 runtime failure, 2 bad input.
int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace genclust

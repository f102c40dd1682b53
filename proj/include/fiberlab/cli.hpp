#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace fiberlab::cli {

// Entry point shared by the binary and the tests. args excludes the program
// name. Exit codes: 0 pass, 1 error, 2 a paper bound was violated, 64 usage,
// 65 config parse error.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace fiberlab::cli

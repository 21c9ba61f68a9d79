#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace dpca::cli {

/// Exit codes: 0 success, 1 runtime error, 2 usage error. Errors are reported
/// as a single line "dpca: error[<Code>]: <message>" on `err`.
int run(int argc, char** argv, std::ostream& out, std::ostream& err);
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace dpca::cli

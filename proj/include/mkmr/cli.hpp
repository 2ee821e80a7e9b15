#pragma once

#include <string>
#include <vector>

namespace mkmr {

/// Entry point shared by the binary and the tests. `args` excludes the
/// program name. Exit codes: 0 success, 3 file or format error, 4 bad
/// dimensions or arguments, 5 a statistics suite reported FAIL; usage errors
/// follow the parser's convention.
int run_cli(std::vector<std::string> args);

}  // namespace mkmr

#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace pcad {

/// Entry point of the `pcad` tool. args[0] is the program name. Returns the
/// exit status: 0 ok, 2 usage, 3 data/format, 4 internal.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace pcad

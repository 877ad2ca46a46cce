#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace lava {

// Exit codes: 0 success, 1 usage or parameter error, 2 data or I/O error.
int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

int cli_main(int argc, char** argv);

}  // namespace lava

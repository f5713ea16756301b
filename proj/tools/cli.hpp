#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace seit::cli {

// args[0] is the program name. Returns 0 on success, 1 on a domain error
// (bad input file, no path, simulation failure) and 2 on a usage error.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace seit::cli

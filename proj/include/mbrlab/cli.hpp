#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace mbrlab {

// Runs the command-line tool. `args[0]` is the program name. Returns the
// process exit code (0 success, 1 input/validation error, 2 bridge/protocol
// error); errors are reported as one line on `err`:
//   mbrlab: error: <class>: <message>
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace mbrlab

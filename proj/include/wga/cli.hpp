// Command-line front end
//
// Exit codes: 0 success, 1 domain error (bad physics input, solver failure,
// unreadable data), 2 usage error (unknown flag or config key, malformed
// command line). Every subcommand takes --config <file.json>; its keys are
// the long option names without dashes and explicit flags win over them.

#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace wga::cli {

// args excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run(int argc, char** argv);

}  // namespace wga::cli

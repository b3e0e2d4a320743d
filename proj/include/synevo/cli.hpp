#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace synevo {

// Exit codes of the command-line tool.
enum ExitCode : int {
  kExitOk = 0,
  kExitConfig = 1,     // configuration, IO, parse or resume problems
  kExitNumeric = 2,    // overflow or training divergence
  kExitSynthesis = 3,  // strict synthesis found no offspring within budget
};

// Entry point behind the synevo executable. args excludes the program name.
// Settings resolve as: --section.key=value flags, then the config file, then defaults.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace synevo

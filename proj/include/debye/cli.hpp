#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace debye {

/// Process exit codes of the command-line tool.
enum ExitCode : int {
  kExitOk = 0,
  kExitConfig = 2,
  kExitBlowUp = 3,
  kExitVerdict = 4,
};

/// Entry point of `debye_limit`. `args` excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

const char* version_string() noexcept;

}  // namespace debye

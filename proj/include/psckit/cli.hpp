#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace psckit {

enum ExitCode : int { kExitOk = 0, kExitUsage = 2, kExitIo = 3, kExitNumerical = 4 };

// Entry point of psc_kit. JSON results go to `out`, progress and errors to `err`.
int run_cli(int argc, char** argv, std::ostream& out, std::ostream& err);
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace psckit

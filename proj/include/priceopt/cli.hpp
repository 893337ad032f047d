#pragma once

// Command-line front end: fit | optimize | simulate | export.
//
// Exit codes: 0 success, 2 usage or parse error, 3 fit failure, 4 SDP
// failure, 5 no feasible rounding, 6 I/O failure. Errors are reported on
// stderr as one JSON object per line.

#include <iosfwd>
#include <string>
#include <vector>

#include "priceopt/error.hpp"

namespace priceopt {

enum ExitCode : int {
  kExitOk = 0,
  kExitUsage = 2,
  kExitFit = 3,
  kExitSdp = 4,
  kExitNoFeasible = 5,
  kExitIo = 6,
};

int exit_code_for(ErrorCode code);

/// args excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace priceopt

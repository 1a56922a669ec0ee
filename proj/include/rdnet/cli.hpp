#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace rdnet {

/// Process exit codes.
enum ExitCode : int {
  kExitOk = 0,
  kExitFailure = 1,
  kExitValidation = 2,
  kExitSolver = 3,
  kExitTooLarge = 4,
  kExitUnknownExperiment = 5,
};

/// Runs the command line `args` (args[0] is the program name). Never throws;
/// every failure maps to an ExitCode with a one-line diagnostic on `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace rdnet

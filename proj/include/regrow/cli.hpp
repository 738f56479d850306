#pragma once

#include <iosfwd>

namespace regrow {

enum ExitCode : int {
  kExitOk = 0,
  kExitInternal = 1,
  kExitUsage = 2,
  kExitInput = 3,             // unreadable or invalid files, bad options
  kExitPositivesRequired = 4,
  kExitParse = 5,             // regex or grammar text that does not parse
  kExitTooLarge = 6,          // conversion exceeded its size budget
};

// Entry point of the `regrow` command: synth, eval, convert, serve.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace regrow

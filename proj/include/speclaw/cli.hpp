#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace speclaw {

/// Runs one `speclaw <command> [flags]` invocation. Reports and CSV go to the
/// --out file (or `out` when absent), followed by a one-line summary on `out`.
/// Failures print a JSON error record on `err`. Returns the process exit code:
/// 0 success, 1 config/IO/validation, 2 numerical non-convergence,
/// 3 assertion failure.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);
/// Same, with the arguments after the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Exit code for an error kind name as printed in error records.
int exit_code_for(const std::string& kind);

}  // namespace speclaw

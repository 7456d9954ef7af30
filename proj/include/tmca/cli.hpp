#pragma once

// Command-line driver. Exit codes: 0 success, 1 negative analysis result
// under --strict, 2 usage error, 3 module error. Errors print one line
// "error code=<CODE> message=<text>" to `err`.

#include <iosfwd>
#include <string>
#include <vector>

namespace tmca {

  inline constexpr int exit_ok       = 0;
  inline constexpr int exit_negative = 1;
  inline constexpr int exit_usage    = 2;
  inline constexpr int exit_error    = 3;

  // `args` excludes the program name.
  int run_cli(std::vector<std::string> args, std::ostream& out, std::ostream& err);

}  // namespace tmca

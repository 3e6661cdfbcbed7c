#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace optdesign::cli {

/// Process exit codes.
enum ExitCode : int {
  kOk = 0,
  kUsage = 2,      // bad flags or invalid input values
  kNumerical = 3,  // solver or fit failed to converge
  kIo = 4,         // unreadable input or unwritable output
};

/// Runs the `optdesign` command line. Results go to `out`, diagnostics to
/// `err`. Subcommands: solve, fit, robustness, simulate, curve.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

/// Convenience overload; args excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Parses "a,b,c" into exactly `count` finite doubles; throws ValidationError.
std::vector<double> parse_list(const std::string& text, std::size_t count);

/// Reads `key=value` lines ('#' comments, blank lines ignored) and turns
/// every key that is not already present in `args` into `--key value`
/// (or `--key` for true booleans, skipped for false). Flags win over the file.
std::vector<std::string> merge_config(const std::string& path, std::vector<std::string> args);

}  // namespace optdesign::cli

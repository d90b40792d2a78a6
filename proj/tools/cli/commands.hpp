#pragma once

#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

namespace fsel::cli {

enum ExitCode : int { exit_ok = 0, exit_internal = 1, exit_usage = 2, exit_data = 3, exit_numerical = 4 };

/// Bad flags or flag combinations; maps to exit code 2.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Replaces `--config FILE` with the file's key=value pairs as `--key=value`
/// arguments placed right after the subcommand, ahead of the explicit flags,
/// so explicit flags win. Throws UsageError for an unreadable file.
std::vector<std::string> expand_config(const std::vector<std::string>& args);

/// Entry point without the program name. Errors are reported on `err` as a
/// single line "fsel: error[usage|data|numerical|internal]: detail".
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace fsel::cli

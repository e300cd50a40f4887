#pragma once

#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

namespace CLI {
class App;
}

namespace eqnet::cli {

/// Exit codes.
enum Exit { Ok = 0, VerdictFailure = 1, UsageError = 2, InternalError = 3 };

/// Runs the tool with `args` (without the program name). Normal output goes
/// to `out`, diagnostics (`error: <kind>: <detail>`) to `err`.
int run(const std::vector<std::string> &args, std::ostream &out, std::ostream &err);

/// The full command tree, for help-text checks.
std::unique_ptr<CLI::App> describe();

} // namespace eqnet::cli

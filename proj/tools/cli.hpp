#pragma once

#include <atomic>
#include <iosfwd>
#include <string>
#include <vector>

namespace socnav {

enum ExitCode : int { kExitOk = 0, kExitConfig = 1, kExitRuntime = 2, kExitMismatch = 3 };

/// Entry point behind the socnav binary. `args` excludes the program name.
/// Data goes to `out`, diagnostics to `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err,
            const std::atomic<bool>* interrupt = nullptr);

}  // namespace socnav

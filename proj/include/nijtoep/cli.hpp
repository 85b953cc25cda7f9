#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace nijtoep {

// Full command-line front end: `generate`, `check` and `transform`
// subcommands with --config/--tolerance/--seed/--out (and --dump for
// transform). Returns the process exit code: 0 on success, 1 on input
// errors, 2 when a mathematical check fails.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace nijtoep

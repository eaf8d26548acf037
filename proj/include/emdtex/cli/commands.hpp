#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace emdtex::cli {

// Exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitInvalid = 1;  // invariant or validation failure
inline constexpr int kExitIo = 2;       // I/O, format or usage error

// Runs one subcommand; `args` excludes the program name. Reads the default
// config from $EMDTEX_CONFIG when set.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace emdtex::cli

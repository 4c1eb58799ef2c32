#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace ssvb::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntime = 1;
inline constexpr int kExitUsage = 2;

inline constexpr int kSchemaVersion = 1;

/// Runs one command line (without the program name). Reports go to `out`
/// unless --output names a file; diagnostics go to `err`. `in` backs
/// `--input -`. Returns 0 on success, 2 on usage errors, 1 otherwise.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err,
        std::istream& in);

}  // namespace ssvb::cli

#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace mna::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;       // bad flags or parameters
inline constexpr int kExitData = 2;        // input validation, unwritable output
inline constexpr int kExitMaxCycles = 3;   // a simulation stopped at max_cycles
inline constexpr int kExitInternal = 4;    // failed self-check; a bug

/// Environment variable consulted when --out is not given.
inline constexpr const char* kOutputDirEnv = "MNA_OUTPUT_DIR";

/// Runs one `mna` invocation. `args` excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace mna::cli

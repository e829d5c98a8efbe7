#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace lendsim::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 1;
inline constexpr int kExitIo = 2;

/// Runs `lendsim <args...>`; args excludes the program name. Errors go to
/// `err` as one JSON object per line.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace lendsim::cli

#pragma once

#include <iosfwd>

namespace gcact::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFormat = 2;
inline constexpr int kExitParameter = 3;

/// Entry point shared by the gcact binary and the tests.
/// Exit codes: 0 success, 2 malformed input file, 3 invalid parameter.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace gcact::cli

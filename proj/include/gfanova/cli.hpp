#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace gfanova::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInputError = 2;
inline constexpr int kExitDegenerateVariance = 3;

// Entry point of the `gfanova` tool. args excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace gfanova::cli

#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace randhyp::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitDegeneracy = 3;

/// Environment variable naming the default output directory.
inline constexpr const char* kOutputEnv = "RANDHYP_OUT";

/// Entry point of the `randhyp` tool. `args` excludes the program name.
/// A one-line JSON summary goes to `out`; error records go to `err` and to
/// error.json in the output directory.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

int run(int argc, char** argv, std::ostream& out, std::ostream& err);

} // namespace randhyp::cli

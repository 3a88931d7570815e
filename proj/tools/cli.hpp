#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace udgen::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitData = 2;

/// Runs one subcommand (synth, train, embed, cluster, uncertainty, sample,
/// report, gradcheck). `args` excludes the program name.
int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace udgen::cli

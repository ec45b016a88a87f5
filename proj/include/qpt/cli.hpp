#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace qpt::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitNumerical = 2;

/// 64-bit FNV-1a.
std::uint64_t fnv1a(const std::string& data);

/// Entry point of the `qpt` tool. Output directories default to the
/// config's out_dir, then $QPT_OUT_DIR, then "qpt_out".
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run(int argc, char** argv);

}  // namespace qpt::cli

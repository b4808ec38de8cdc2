#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace cfsv::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;  ///< unexpected internal failure
inline constexpr int kExitInput = 2;
inline constexpr int kExitNumerical = 3;

/// Runs the tool on `args` (without the program name). Results go to `out`,
/// diagnostics to `err`. Returns the process exit code.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Lowercase hex SHA-256 of `data`.
std::string sha256_hex(std::string_view data);

}  // namespace cfsv::cli

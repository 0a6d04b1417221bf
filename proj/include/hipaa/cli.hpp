#pragma once

// The hipaachecker command line: scan, batch, rules and render.

#include <ostream>
#include <span>
#include <string>

namespace hipaa::cli {

inline constexpr int kExitCompliant = 0;
inline constexpr int kExitNonCompliant = 1;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitIngestion = 3;

// `args` excludes the program name. Returns the process exit status.
int run(std::span<const std::string> args, std::ostream& out, std::ostream& err);

} // namespace hipaa::cli

// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <exception>
#include <iosfwd>

namespace atq::cli {

enum ExitCode : int {
  kOk = 0,
  kFailure = 1,
  kParse = 2,
  kInvariant = 3,
  kUnknownEntity = 4,
  kMissingAttribution = 5,
  kFormula = 6,
  kUsage = 64,
};

/// Maps a library exception onto the process exit code.
int exit_code(const std::exception& e) noexcept;

/// Runs one atq invocation; data goes to `out`, diagnostics to `err`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace atq::cli

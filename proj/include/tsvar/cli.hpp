#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace tsvar::cli {

// Stable exit-code contract.
inline constexpr int kOk = 0;
inline constexpr int kVerificationFailed = 1;
inline constexpr int kInputError = 2;
inline constexpr int kNumericalFailure = 3;

/// Runs `tsvar <subcommand> ...`; args exclude the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace tsvar::cli

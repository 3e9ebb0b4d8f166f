#pragma once

#include <iosfwd>

namespace kreisslab::cli {

enum ExitCode : int {
    kOk = 0,
    kFail = 1,
    kUnstable = 2,
    kSchema = 3,
    kSynthesisFailed = 4,
    kBlowup = 5,
    kIndeterminate = 6,
    kTooLarge = 7,
};

// Largest state dimension accepted by the brute-force oracle command.
inline constexpr long kOracleMaxStates = 12;

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

} // namespace kreisslab::cli

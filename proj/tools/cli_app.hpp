#pragma once

#include <iosfwd>

namespace inspag::cli {

// Exit codes.
constexpr int kOk = 0;
constexpr int kInputError = 1;
constexpr int kNotCertified = 2;
constexpr int kOracleBreach = 3;
constexpr int kSolverError = 4;

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace inspag::cli

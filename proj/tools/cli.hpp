#pragma once

// Command-line front end. Subcommands: theory, wigner, simulate, run, images,
// eval. Exit codes: 0 success, 1 runtime failure, 2 usage error.

#include <iosfwd>
#include <string>
#include <vector>

namespace mfca::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

// args excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

// "a:step:b" (inclusive, a ≤ b) or a comma list. Throws InvalidArgument on
// malformed or empty input.
std::vector<double> parse_range(const std::string& text);
std::vector<int> parse_int_list(const std::string& text);

// Shortest decimal that round-trips, used in file names ("0.1", "1", "inf").
std::string number_label(double v);

}  // namespace mfca::cli

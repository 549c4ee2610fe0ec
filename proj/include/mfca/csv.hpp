#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace mfca::csv {

// 17 significant digits, enough for an exact double round-trip.
std::string format(double v);

std::vector<std::string> split(std::string_view line, char sep = ',');

double parse_double(const std::string& s);
long long parse_int(const std::string& s);

// Reads the next non-comment, non-empty line. Comment lines ('#') are
// appended to `comments` when given.
bool next_record(std::istream& is, std::string& line,
                 std::vector<std::string>* comments = nullptr);

}  // namespace mfca::csv

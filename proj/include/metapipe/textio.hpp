#pragma once

#include <istream>
#include <span>
#include <string>
#include <vector>

namespace metapipe::textio {

/// 17 significant digits; round-trips every double.
std::string g17(double v);
/// Shortest text that parses back to the same double.
std::string shortest(double v);
/// Six decimals, used in human-facing CSVs.
std::string fixed6(double v);

std::string join(std::span<const double> values);

/// Reads the next non-empty line and checks that its first token is `key`.
/// Returns the remaining tokens.
std::vector<std::string> expect_line(std::istream& in, const std::string& key);
double to_double(const std::string& token);
std::size_t to_size(const std::string& token);
std::vector<double> to_doubles(const std::vector<std::string>& tokens, std::size_t expected);

}  // namespace metapipe::textio

#include "metapipe/textio.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "metapipe/core.hpp"

namespace metapipe::textio {

std::string shortest(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string fixed6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

std::string join(std::span<const double> values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += ' ';
    out += g17(values[i]);
  }
  return out;
}

std::vector<std::string> expect_line(std::istream& in, const std::string& key) {
  std::string line;
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    std::string head;
    if (!(ls >> head)) continue;
    if (head != key) throw Error("model file: expected '" + key + "', found '" + head + "'");
    std::vector<std::string> tokens;
    for (std::string t; ls >> t;) tokens.push_back(t);
    return tokens;
  }
  throw Error("model file: unexpected end of file, expected '" + key + "'");
}

double to_double(const std::string& token) {
  double v;
  const auto* end = token.data() + token.size();
  auto [ptr, ec] = std::from_chars(token.data(), end, v);
  if (ec != std::errc() || ptr != end || !std::isfinite(v))
    throw Error("model file: invalid number '" + token + "'");
  return v;
}

std::size_t to_size(const std::string& token) {
  std::size_t v;
  const auto* end = token.data() + token.size();
  auto [ptr, ec] = std::from_chars(token.data(), end, v);
  if (ec != std::errc() || ptr != end) throw Error("model file: invalid count '" + token + "'");
  return v;
}

std::vector<double> to_doubles(const std::vector<std::string>& tokens, std::size_t expected) {
  if (tokens.size() != expected) {
    throw Error("model file: expected " + std::to_string(expected) + " values, found " +
                std::to_string(tokens.size()));
  }
  std::vector<double> out;
  out.reserve(tokens.size());
  for (const auto& t : tokens) out.push_back(to_double(t));
  return out;
}

}  // namespace metapipe::textio

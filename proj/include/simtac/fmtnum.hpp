#pragma once

#include <charconv>
#include <cmath>
#include <cstdint>
#include <string>

namespace simtac {

/// Shortest round-trip decimal form of a double. Used everywhere a number
/// reaches a file or the terminal so that record files are byte-identical
/// across runs and machines.
inline std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

/// Parse a double accepting "inf"/"infinity" (any case) and a trailing
/// f/F suffix as in C float literals.
inline bool parse_double(std::string_view text, double& out) {
  if (text.empty()) return false;
  std::string lowered(text);
  for (char& c : lowered) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  bool neg = false;
  std::string_view body = lowered;
  if (body.front() == '+' || body.front() == '-') {
    neg = body.front() == '-';
    body.remove_prefix(1);
  }
  if (body == "inf" || body == "infinity") {
    out = neg ? -std::numeric_limits<double>::infinity() : std::numeric_limits<double>::infinity();
    return true;
  }
  if (!text.empty() && (text.back() == 'f' || text.back() == 'F')) text.remove_suffix(1);
  if (text.empty()) return false;
  auto res = std::from_chars(text.data(), text.data() + text.size(), out);
  return res.ec == std::errc{} && res.ptr == text.data() + text.size();
}

}  // namespace simtac

#include "llmforest/cell.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>

namespace llmforest {

namespace {

int rank(const Cell& c) { return static_cast<int>(c.index()) == 0 ? 0 : (is_number(c) ? 1 : 2); }

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r' || s.front() == '\n'))
    s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r' || s.back() == '\n'))
    s.remove_suffix(1);
  return s;
}

}  // namespace

std::strong_ordering compare_cells(const Cell& a, const Cell& b) {
  const int ra = rank(a);
  const int rb = rank(b);
  if (ra != rb) return ra <=> rb;
  if (ra == 1) {
    const double x = as_number(a);
    const double y = as_number(b);
    if (x < y) return std::strong_ordering::less;
    if (y < x) return std::strong_ordering::greater;
    return std::strong_ordering::equal;
  }
  if (ra == 2) {
    const int c = as_category(a).compare(as_category(b));
    return c < 0 ? std::strong_ordering::less
                 : (c > 0 ? std::strong_ordering::greater : std::strong_ordering::equal);
  }
  return std::strong_ordering::equal;
}

std::string serialize_cell(const Cell& c) {
  if (is_missing(c)) return {};
  if (is_category(c)) return as_category(c);
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), as_number(c));
  return std::string(buf, end);
}

std::string display_cell(const Cell& c) {
  if (!is_number(c)) return serialize_cell(c);
  char buf[64];
  double v = as_number(c);
  if (v == 0.0) v = 0.0;  // drop negative zero
  std::snprintf(buf, sizeof(buf), "%.4g", v);
  return buf;
}

bool parse_number(std::string_view text, double& out) {
  text = trim(text);
  if (text.empty()) return false;
  if (text.front() == '+') text.remove_prefix(1);
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc{} || ptr != text.data() + text.size()) return false;
  if (!std::isfinite(v)) return false;
  out = v;
  return true;
}

double round_significant(double value, int digits) {
  if (value == 0.0 || !std::isfinite(value)) return value;
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*e", digits - 1, value);
  double out = 0.0;
  parse_number(buf, out);
  return out;
}

}  // namespace llmforest

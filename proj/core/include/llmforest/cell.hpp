#pragma once

#include <compare>
#include <string>
#include <string_view>
#include <variant>

namespace llmforest {

struct Missing {
  friend bool operator==(const Missing&, const Missing&) = default;
};

/// A table cell: missing, a category label, or a finite number.
using Cell = std::variant<Missing, std::string, double>;

inline bool is_missing(const Cell& c) { return std::holds_alternative<Missing>(c); }
inline bool is_number(const Cell& c) { return std::holds_alternative<double>(c); }
inline bool is_category(const Cell& c) { return std::holds_alternative<std::string>(c); }

inline double as_number(const Cell& c) { return std::get<double>(c); }
inline const std::string& as_category(const Cell& c) { return std::get<std::string>(c); }

/// Total order used for tie-breaking: Missing < Number < Category,
/// numbers by value, categories lexicographically.
std::strong_ordering compare_cells(const Cell& a, const Cell& b);

struct CellLess {
  bool operator()(const Cell& a, const Cell& b) const { return compare_cells(a, b) < 0; }
};

/// Shortest round-trip text; used for CSV output. Missing renders empty.
std::string serialize_cell(const Cell& c);

/// Human-facing rendering: numbers with up to 4 significant digits.
std::string display_cell(const Cell& c);

/// Parses a whole string as a finite number (surrounding blanks allowed).
bool parse_number(std::string_view text, double& out);

/// Rounds to `digits` significant digits.
double round_significant(double value, int digits);

}  // namespace llmforest

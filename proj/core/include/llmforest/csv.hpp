#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "llmforest/table.hpp"

namespace llmforest {

struct ColumnSchema {
  std::string name;
  FeatureKind kind = FeatureKind::categorical;
  std::string description;
  bool label = false;
};

/// Column declarations plus ingestion settings. Stored as JSON:
/// {"description": ..., "missing_tokens": [...],
///  "columns": [{"name", "kind", "description", "label"}]}
struct Schema {
  std::string description;
  std::vector<ColumnSchema> columns;
  /// Compared case-insensitively after trimming.
  std::vector<std::string> missing_tokens = {"", "NA", "NaN", "null"};
};

Schema load_schema(const std::filesystem::path& path);
Schema parse_schema(const std::string& json_text);
std::string schema_to_json(const Schema& schema);
/// Schema describing an existing table (kinds as currently resolved).
Schema schema_of(const Table& table);

/// Splits CSV text into records (RFC 4180 quoting).
std::vector<std::vector<std::string>> parse_csv(const std::string& text);
std::string csv_escape(const std::string& field);

Table load_csv(const std::filesystem::path& path, const Schema& schema);
Table table_from_csv_text(const std::string& text, const Schema& schema);
void write_csv(std::ostream& out, const Table& table);
void write_csv(const std::filesystem::path& path, const Table& table);

/// Sparse "row,column,value" listing, column given by name.
void write_truth_csv(const std::filesystem::path& path, const ShadowTruth& truth, const Table& table);
ShadowTruth load_truth_csv(const std::filesystem::path& path, const Table& table);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, const std::string& contents);

}  // namespace llmforest

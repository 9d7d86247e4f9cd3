#include "llmforest/csv.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "llmforest/errors.hpp"

namespace llmforest {

namespace {

std::string lower_trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

}  // namespace

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& path, const std::string& contents) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  out << contents;
  if (!out) throw DataError("write failed for " + path.string());
}

Schema parse_schema(const std::string& json_text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("schema is not valid JSON: ") + e.what());
  }
  Schema schema;
  schema.description = j.value("description", std::string{});
  if (j.contains("missing_tokens")) schema.missing_tokens = j.at("missing_tokens").get<std::vector<std::string>>();
  if (!j.contains("columns") || !j.at("columns").is_array())
    throw ConfigError("schema needs a 'columns' array");
  for (const auto& c : j.at("columns")) {
    ColumnSchema col;
    col.name = c.at("name").get<std::string>();
    col.kind = parse_feature_kind(c.value("kind", std::string("categorical")));
    col.description = c.value("description", std::string{});
    col.label = c.value("label", false);
    schema.columns.push_back(std::move(col));
  }
  if (std::count_if(schema.columns.begin(), schema.columns.end(), [](const auto& c) { return c.label; }) > 1)
    throw ConfigError("schema declares more than one label column");
  return schema;
}

Schema load_schema(const std::filesystem::path& path) { return parse_schema(read_file(path)); }

std::string schema_to_json(const Schema& schema) {
  nlohmann::ordered_json j;
  j["description"] = schema.description;
  j["missing_tokens"] = schema.missing_tokens;
  j["columns"] = nlohmann::ordered_json::array();
  for (const auto& c : schema.columns) {
    nlohmann::ordered_json col;
    col["name"] = c.name;
    col["kind"] = std::string(to_string(c.kind));
    col["description"] = c.description;
    col["label"] = c.label;
    j["columns"].push_back(std::move(col));
  }
  return j.dump(2) + "\n";
}

Schema schema_of(const Table& table) {
  Schema schema;
  schema.description = table.description();
  for (std::size_t j = 0; j < table.cols(); ++j) {
    const auto& spec = table.column(j);
    schema.columns.push_back({spec.name, spec.kind, spec.description, table.label_column() == j});
  }
  return schema;
}

std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
  std::vector<std::vector<std::string>> records;
  std::vector<std::string> record;
  std::string field;
  bool in_quotes = false;
  bool field_started = false;
  std::size_t i = 0;
  auto end_field = [&] {
    record.push_back(std::move(field));
    field.clear();
    field_started = false;
  };
  auto end_record = [&] {
    end_field();
    records.push_back(std::move(record));
    record.clear();
  };
  if (text.size() >= 3 && static_cast<unsigned char>(text[0]) == 0xEF &&
      static_cast<unsigned char>(text[1]) == 0xBB && static_cast<unsigned char>(text[2]) == 0xBF)
    i = 3;
  for (; i < text.size(); ++i) {
    const char c = text[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        field.push_back(c);
      }
      continue;
    }
    switch (c) {
      case '"':
        in_quotes = true;
        field_started = true;
        break;
      case ',':
        end_field();
        field_started = true;
        break;
      case '\r':
        break;
      case '\n':
        end_record();
        break;
      default:
        field.push_back(c);
        field_started = true;
    }
  }
  if (in_quotes) throw DataError("unterminated quoted field in CSV");
  if (field_started || !field.empty() || !record.empty()) end_record();
  return records;
}

std::string csv_escape(const std::string& field) {
  if (field.find_first_of(",\"\n\r") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

Table table_from_csv_text(const std::string& text, const Schema& schema) {
  auto records = parse_csv(text);
  if (records.empty()) throw DataError("CSV is empty");
  const auto& header = records.front();
  if (header.size() != schema.columns.size())
    throw DataError("CSV header has " + std::to_string(header.size()) + " columns, schema declares " +
                    std::to_string(schema.columns.size()));
  for (std::size_t j = 0; j < header.size(); ++j)
    if (header[j] != schema.columns[j].name)
      throw DataError("CSV header column " + std::to_string(j) + " is '" + header[j] +
                      "', schema expects '" + schema.columns[j].name + "'");

  std::vector<std::string> tokens;
  for (const auto& t : schema.missing_tokens) tokens.push_back(lower_trim(t));
  auto is_missing_token = [&](const std::string& s) {
    const std::string key = lower_trim(s);
    return std::find(tokens.begin(), tokens.end(), key) != tokens.end();
  };

  const std::size_t d = header.size();
  std::size_t n = 0;
  for (std::size_t r = 1; r < records.size(); ++r) {
    if (records[r].size() == 1 && records[r][0].empty()) continue;  // blank line
    ++n;
  }
  std::vector<Cell> cells;
  cells.reserve(n * d);
  std::vector<bool> all_numeric(d, true);
  std::size_t line = 0;
  for (std::size_t r = 1; r < records.size(); ++r) {
    const auto& rec = records[r];
    if (rec.size() == 1 && rec[0].empty()) continue;
    ++line;
    if (rec.size() != d)
      throw DataError("CSV record " + std::to_string(line) + " has " + std::to_string(rec.size()) +
                      " fields, expected " + std::to_string(d));
    for (std::size_t j = 0; j < d; ++j) {
      if (is_missing_token(rec[j])) {
        cells.emplace_back(Missing{});
        continue;
      }
      double v = 0.0;
      const bool ok = parse_number(rec[j], v);
      const auto kind = schema.columns[j].kind;
      if (kind == FeatureKind::normal || kind == FeatureKind::numeric_binned) {
        if (!ok)
          throw DataError("unparseable numeric cell '" + rec[j] + "' in column '" + header[j] +
                          "' (record " + std::to_string(line) + ")");
        cells.emplace_back(v);
      } else {
        if (!ok) all_numeric[j] = false;
        cells.emplace_back(rec[j]);
      }
    }
  }
  for (std::size_t j = 0; j < d; ++j) {
    const auto kind = schema.columns[j].kind;
    if (kind == FeatureKind::normal || kind == FeatureKind::numeric_binned || !all_numeric[j]) continue;
    for (std::size_t i = 0; i < n; ++i) {
      Cell& c = cells[i * d + j];
      if (is_category(c)) {
        double v = 0.0;
        parse_number(as_category(c), v);
        c = v;
      }
    }
  }

  std::vector<FeatureSpec> columns;
  std::optional<std::size_t> label;
  for (std::size_t j = 0; j < d; ++j) {
    FeatureSpec spec;
    spec.name = schema.columns[j].name;
    spec.kind = schema.columns[j].kind;
    spec.description = schema.columns[j].description;
    columns.push_back(std::move(spec));
    if (schema.columns[j].label) label = j;
  }
  return Table(std::move(columns), std::move(cells), label, schema.description);
}

Table load_csv(const std::filesystem::path& path, const Schema& schema) {
  return table_from_csv_text(read_file(path), schema);
}

void write_csv(std::ostream& out, const Table& table) {
  for (std::size_t j = 0; j < table.cols(); ++j) {
    if (j) out << ',';
    out << csv_escape(table.column(j).name);
  }
  out << '\n';
  for (std::size_t i = 0; i < table.rows(); ++i) {
    for (std::size_t j = 0; j < table.cols(); ++j) {
      if (j) out << ',';
      out << csv_escape(serialize_cell(table.cell(i, j)));
    }
    out << '\n';
  }
}

void write_csv(const std::filesystem::path& path, const Table& table) {
  std::ostringstream ss;
  write_csv(ss, table);
  write_file(path, ss.str());
}

void write_truth_csv(const std::filesystem::path& path, const ShadowTruth& truth, const Table& table) {
  std::ostringstream ss;
  ss << "row,column,value\n";
  for (const auto& [key, value] : truth.entries())
    ss << key.first << ',' << csv_escape(table.column(key.second).name) << ','
       << csv_escape(serialize_cell(value)) << '\n';
  write_file(path, ss.str());
}

ShadowTruth load_truth_csv(const std::filesystem::path& path, const Table& table) {
  auto records = parse_csv(read_file(path));
  if (records.empty() || records.front() != std::vector<std::string>{"row", "column", "value"})
    throw DataError("truth file " + path.string() + " lacks the row,column,value header");
  ShadowTruth truth;
  for (std::size_t r = 1; r < records.size(); ++r) {
    const auto& rec = records[r];
    if (rec.size() == 1 && rec[0].empty()) continue;
    if (rec.size() != 3) throw DataError("truth record " + std::to_string(r) + " needs 3 fields");
    double row = 0.0;
    if (!parse_number(rec[0], row) || row < 0 || row != static_cast<double>(static_cast<std::size_t>(row)))
      throw DataError("bad row index '" + rec[0] + "' in truth file");
    auto col = table.column_index(rec[1]);
    if (!col) throw DataError("unknown column '" + rec[1] + "' in truth file");
    const auto& spec = table.column(*col);
    double v = 0.0;
    const bool category_column = spec.observed > 0 && !spec.numeric;
    if (!category_column && parse_number(rec[2], v))
      truth.set(static_cast<std::size_t>(row), *col, v);
    else
      truth.set(static_cast<std::size_t>(row), *col, rec[2]);
  }
  return truth;
}

}  // namespace llmforest

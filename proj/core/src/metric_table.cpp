#include "irtgrid/metric_table.hpp"

#include <algorithm>
#include <fstream>
#include <limits>
#include <set>

#include <nlohmann/json.hpp>

#include "irtgrid/csv.hpp"
#include "irtgrid/errors.hpp"
#include "irtgrid/fsio.hpp"

namespace irtgrid {

namespace {
constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();
}

const MetricColumn* MetricTable::find(const std::string& name) const {
  for (const auto& col : columns) {
    if (col.name == name) {
      return &col;
    }
  }
  return nullptr;
}

MetricSchema parse_metric_schema(const std::string& json_text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("invalid schema JSON: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("columns") || !doc["columns"].is_object()) {
    throw ParseError("schema must be an object with a \"columns\" object");
  }
  MetricSchema schema;
  for (const auto& [name, decl] : doc["columns"].items()) {
    MetricSchema::Decl d;
    const std::string kind = decl.value("kind", "");
    if (kind == "numeric") {
      d.kind = ColumnKind::Numeric;
    } else if (kind == "ordinal") {
      d.kind = ColumnKind::Ordinal;
      if (!decl.contains("categories") || !decl["categories"].is_array() ||
          decl["categories"].empty()) {
        throw ParseError("ordinal column \"" + name + "\" needs a non-empty categories list");
      }
      for (const auto& cat : decl["categories"]) {
        d.categories.push_back(cat.get<std::string>());
      }
      if (decl.contains("unassigned")) {
        d.unassigned = decl["unassigned"].get<std::string>();
      }
    } else {
      throw ParseError("column \"" + name + "\": kind must be numeric or ordinal");
    }
    schema.columns[name] = std::move(d);
  }
  if (doc.contains("missing_tokens")) {
    schema.missing_tokens.clear();
    for (const auto& tok : doc["missing_tokens"]) {
      schema.missing_tokens.push_back(tok.get<std::string>());
    }
  }
  return schema;
}

MetricSchema load_metric_schema(const std::string& path) {
  return parse_metric_schema(read_file(path));
}

MetricTable load_metric_table(std::istream& in, const MetricSchema& schema) {
  std::string line;
  if (!std::getline(in, line)) {
    throw ParseError("metric file is empty (header row is mandatory)");
  }
  const auto header = split_csv_line(line);
  if (header.empty() || trim(header[0]) != "item_id") {
    throw ParseError("metric file must start with an item_id column");
  }

  MetricTable table;
  table.columns.reserve(header.size() - 1);
  for (std::size_t c = 1; c < header.size(); ++c) {
    const std::string name = trim(header[c]);
    const auto decl = schema.columns.find(name);
    if (decl == schema.columns.end()) {
      throw ParseError("undeclared metric column \"" + name + "\"");
    }
    if (table.find(name) != nullptr) {
      throw ParseError("duplicate metric column \"" + name + "\"");
    }
    MetricColumn col;
    col.name = name;
    col.kind = decl->second.kind;
    col.categories = decl->second.categories;
    table.columns.push_back(std::move(col));
  }

  const auto is_missing_token = [&](const std::string& cell) {
    return std::find(schema.missing_tokens.begin(), schema.missing_tokens.end(), cell) !=
           schema.missing_tokens.end();
  };

  std::size_t line_no = 1;
  std::set<std::string> seen_items;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) {
      continue;
    }
    const auto cells = split_csv_line(line);
    if (cells.size() != header.size()) {
      throw ParseError("row " + std::to_string(line_no) + " has " + std::to_string(cells.size()) +
                       " fields, expected " + std::to_string(header.size()));
    }
    std::string item_id = trim(cells[0]);
    if (!seen_items.insert(item_id).second) {
      throw ParseError("duplicate item_id \"" + item_id + "\" at row " + std::to_string(line_no));
    }
    table.item_ids.push_back(std::move(item_id));
    for (std::size_t c = 1; c < cells.size(); ++c) {
      MetricColumn& col = table.columns[c - 1];
      const std::string cell = trim(cells[c]);
      const auto& decl = schema.columns.at(col.name);
      if (is_missing_token(cell) ||
          (decl.unassigned && cell == *decl.unassigned)) {
        col.values.push_back(kMissing);
        continue;
      }
      if (col.kind == ColumnKind::Numeric) {
        col.values.push_back(parse_double(cell, "row " + std::to_string(line_no) + ", column " +
                                                    col.name));
      } else {
        const auto it = std::find(col.categories.begin(), col.categories.end(), cell);
        if (it == col.categories.end()) {
          throw ParseError("value \"" + cell + "\" outside declared categories at row " +
                           std::to_string(line_no) + ", column " + col.name);
        }
        col.values.push_back(static_cast<double>(it - col.categories.begin()));
      }
    }
  }
  return table;
}

MetricTable load_metric_table_file(const std::string& path, const MetricSchema& schema) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw ParseError("cannot open metric file: " + path);
  }
  return load_metric_table(in, schema);
}

}  // namespace irtgrid

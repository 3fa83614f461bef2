#pragma once

#include <cmath>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace irtgrid {

enum class ColumnKind { Numeric, Ordinal };

/// One per-item metric. Missing cells are NaN, never zero. Ordinal cells
/// store the integer code of the category in declared order.
struct MetricColumn {
  std::string name;
  ColumnKind kind = ColumnKind::Numeric;
  std::vector<std::string> categories;  // ordinal only, declared order
  std::vector<double> values;           // aligned with MetricTable::item_ids

  bool is_missing(std::size_t row) const { return std::isnan(values[row]); }
};

struct MetricTable {
  std::vector<std::string> item_ids;
  std::vector<MetricColumn> columns;

  const MetricColumn* find(const std::string& name) const;
  std::size_t row_count() const { return item_ids.size(); }
};

/// Column kind declarations for load_metric_table. The sidecar file is a
/// JSON document:
///
///   {
///     "columns": {
///       "grade": {"kind": "ordinal", "categories": ["3", "5", "8"],
///                 "unassigned": "other"},
///       "answer_length_chars": {"kind": "numeric"}
///     },
///     "missing_tokens": ["", "N/A"]
///   }
///
/// An optional "unassigned" category is accepted on input but loaded as
/// missing: it is excluded from correlations and collected into the
/// distribution's unassigned row like any other missing cell.
struct MetricSchema {
  struct Decl {
    ColumnKind kind = ColumnKind::Numeric;
    std::vector<std::string> categories;        // ordinal only
    std::optional<std::string> unassigned;      // ordinal only
  };
  std::map<std::string, Decl> columns;
  std::vector<std::string> missing_tokens = {"", "N/A", "NA", "n/a", "na"};
};

MetricSchema parse_metric_schema(const std::string& json_text);
MetricSchema load_metric_schema(const std::string& path);

/// Loads a comma-delimited metric file. The header row is mandatory and its
/// first column must be item_id; every other column must be declared in the
/// schema. Ordinal cells outside the declared categories fail with their
/// row and column.
MetricTable load_metric_table(std::istream& in, const MetricSchema& schema);
MetricTable load_metric_table_file(const std::string& path, const MetricSchema& schema);

}  // namespace irtgrid

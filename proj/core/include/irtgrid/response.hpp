#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace irtgrid {

/// One observed (model, item, correct) triple, r_ij.
struct ResponseRecord {
  std::string model_id;
  std::string item_id;
  int correct = 0;  // exactly 0 or 1
  std::optional<std::string> dataset;

  friend bool operator==(const ResponseRecord&, const ResponseRecord&) = default;
};

struct Observation {
  std::uint32_t model = 0;  // row index
  std::uint32_t item = 0;   // column index
  std::uint8_t correct = 0;

  friend bool operator==(const Observation&, const Observation&) = default;
};

/// Sparse binary correctness matrix. Rows and columns are indexed in
/// first-appearance order of the records the matrix was built from, so
/// index maps are stable under streaming ingestion. Values are immutable
/// after construction and safe for unrestricted concurrent reads.
struct ResponseMatrix {
  std::vector<std::string> models;  // row index -> model_id
  std::vector<std::string> items;   // column index -> item_id
  std::vector<Observation> observations;
  std::optional<std::string> dataset_tag;

  std::size_t model_count() const { return models.size(); }
  std::size_t item_count() const { return items.size(); }

  friend bool operator==(const ResponseMatrix&, const ResponseMatrix&) = default;
};

/// Classical item statistics over the observed entries only.
struct MatrixSummary {
  double density = 0.0;
  std::vector<double> item_facility;          // p_i, per column
  std::vector<double> model_accuracy;         // a_j, per row
  std::vector<std::string> degenerate_items;  // p_i in {0, 1}
};

enum class ParseMode { Strict, Lenient };

struct ParseResult {
  std::vector<ResponseRecord> records;
  std::size_t skipped_lines = 0;  // lenient mode only
};

/// Parses line-delimited records: one JSON object per line with keys
/// model (string), item (string), correct (integer 0/1) and optional
/// dataset (string). Blank lines are ignored. In strict mode any malformed
/// line fails with its line number; in lenient mode malformed lines are
/// skipped and counted. correct outside {0,1} is an error in both modes.
ParseResult parse_response_records(std::istream& in, ParseMode mode = ParseMode::Strict);
ParseResult parse_response_file(const std::string& path, ParseMode mode = ParseMode::Strict);

/// Inverse of parse_response_records; one JSON object per line, field order
/// model, item, correct, dataset.
void write_response_records(std::ostream& out, const std::vector<ResponseRecord>& records);
std::string response_records_to_string(const std::vector<ResponseRecord>& records);

enum class DuplicatePolicy { Error, KeepFirst };

struct BuildOptions {
  std::size_t min_model_obs = 1;
  std::size_t min_item_obs = 1;
  DuplicatePolicy duplicates = DuplicatePolicy::KeepFirst;
};

struct BuildResult {
  ResponseMatrix matrix;
  std::size_t duplicates_dropped = 0;   // repeated (model, item) pairs
  std::size_t duplicate_conflicts = 0;  // dropped pairs that disagreed on correct
  std::size_t models_removed = 0;       // below min_model_obs at the fixed point
  std::size_t items_removed = 0;        // below min_item_obs at the fixed point
};

/// Assembles records into a matrix. Duplicates are resolved per policy,
/// then models/items below the observation thresholds are removed by
/// iterated filtering until a fixed point. Throws PreconditionError when
/// nothing survives.
BuildResult build_matrix(const std::vector<ResponseRecord>& records, const BuildOptions& opts = {});

MatrixSummary matrix_stats(const ResponseMatrix& matrix);

/// Recovers the observation records of a matrix (observation order).
std::vector<ResponseRecord> matrix_to_records(const ResponseMatrix& matrix);

struct HoldoutSplit {
  std::vector<ResponseRecord> fit;
  std::vector<ResponseRecord> holdout;
};

/// Exact partition by model membership; relative record order is preserved
/// in both outputs. An empty holdout side is legal (callers may warn).
HoldoutSplit split_holdout(const std::vector<ResponseRecord>& records,
                           const std::set<std::string>& holdout_models);

}  // namespace irtgrid

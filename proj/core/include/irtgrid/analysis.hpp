#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "irtgrid/metric_table.hpp"
#include "irtgrid/response.hpp"

namespace irtgrid {

/// K equal-size difficulty bins. Bin 0 is easiest, bin K-1 hardest.
/// Items are stably sorted ascending by (difficulty, item_id); when
/// N = qK + r, the first r bins receive q+1 items.
struct DifficultyBinning {
  std::size_t k = 0;
  std::vector<std::string> order;             // sorted item ids
  std::vector<double> sorted_difficulty;      // aligned with order
  std::vector<std::size_t> bin_by_position;   // aligned with order, non-decreasing
  std::unordered_map<std::string, std::size_t> assignment;
  std::vector<std::size_t> bin_sizes;
  std::vector<std::pair<double, double>> bin_edges;  // per bin (min, max) difficulty

  std::size_t item_count() const { return order.size(); }
};

DifficultyBinning bin_by_difficulty(const std::vector<std::pair<std::string, double>>& difficulties,
                                    std::size_t k);

/// Bins file: item_id,difficulty,bin with rows in sorted order.
std::string binning_to_csv(const DifficultyBinning& binning);
DifficultyBinning binning_from_csv(const std::string& text);

/// Spearman rank correlation: Pearson over fractional (average) ranks.
/// NaN entries mark missing values and are deleted pairwise. Throws
/// PreconditionError when fewer than 2 pairs remain or either remaining
/// vector is constant (the correlation is undefined).
double spearman(std::span<const double> x, std::span<const double> y);

struct CorrelationEntry {
  std::string metric_a;
  std::string metric_b;
  double rho = 0.0;
  std::size_t n = 0;  // pairs used after pairwise deletion
};

struct CorrelationReport {
  std::vector<CorrelationEntry> entries;
  std::vector<std::string> skipped;  // pairs with undefined correlation
};

/// Correlates "irt_difficulty" against every metric column and every pair
/// of metric columns over the items shared by both inputs. Ordinal columns
/// enter through their declared integer codes. Undefined pairs are skipped
/// with a note, not an error.
CorrelationReport correlate_metrics(
    const std::vector<std::pair<std::string, double>>& difficulties, const MetricTable& table);

std::string correlation_report_to_json(const CorrelationReport& report);

struct TextItem {
  std::optional<std::string> question;
  std::optional<std::string> answer;
};

/// Builds numeric columns question_length_words (maximal whitespace-
/// separated tokens) and answer_length_chars (Unicode scalar values).
/// Absent texts yield missing cells.
MetricTable derive_text_metrics(const std::vector<std::pair<std::string, TextItem>>& items);

struct ValidationReport {
  std::vector<double> per_bin_accuracy;      // NaN where the bin has no coverage
  std::vector<std::size_t> per_bin_counts;   // holdout observations per bin
  std::optional<double> monotonicity_rho;    // Spearman(bin index, accuracy) over covered bins
  std::size_t violations = 0;                // adjacent covered bins with a strict increase
  std::size_t unknown_items = 0;             // observations on items outside the binning
};

/// Per-bin zero-shot accuracy of held-out models over an existing binning.
/// Throws PreconditionError when no bin is covered.
ValidationReport holdout_validation(const std::vector<ResponseRecord>& holdout,
                                    const DifficultyBinning& binning);

std::string validation_report_to_json(const ValidationReport& report);

/// category x bin contingency counts for one ordinal (or integer-valued
/// numeric) column. Binned items with a missing metric are collected into
/// a trailing "unassigned" row, so row totals sum to the binning size for
/// items present in the table plus missing ones.
struct ContingencyTable {
  std::vector<std::string> row_labels;              // categories + optional "unassigned"
  std::vector<std::vector<std::size_t>> counts;     // [row][bin]
  std::size_t k = 0;
};

ContingencyTable difficulty_distribution(const DifficultyBinning& binning,
                                         const MetricTable& table,
                                         const std::string& column_name);

}  // namespace irtgrid

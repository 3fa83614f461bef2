#include "irtgrid/analysis.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include <nlohmann/json.hpp>

#include "irtgrid/csv.hpp"
#include "irtgrid/errors.hpp"

namespace irtgrid {

namespace {
constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();
}

DifficultyBinning bin_by_difficulty(const std::vector<std::pair<std::string, double>>& difficulties,
                                    std::size_t k) {
  if (k < 1) {
    throw PreconditionError("bin_by_difficulty: k must be >= 1");
  }
  const std::size_t n = difficulties.size();
  if (n < k) {
    throw PreconditionError("bin_by_difficulty: fewer items (" + std::to_string(n) +
                            ") than bins (" + std::to_string(k) + ")");
  }

  DifficultyBinning binning;
  binning.k = k;
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  // Lexicographic item_id breaks difficulty ties, so the binning is
  // independent of input permutation.
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    if (difficulties[a].second != difficulties[b].second) {
      return difficulties[a].second < difficulties[b].second;
    }
    return difficulties[a].first < difficulties[b].first;
  });

  binning.order.reserve(n);
  binning.sorted_difficulty.reserve(n);
  for (const std::size_t i : idx) {
    binning.order.push_back(difficulties[i].first);
    binning.sorted_difficulty.push_back(difficulties[i].second);
  }

  // N = qK + r: the first r bins take q+1 items.
  const std::size_t q = n / k;
  const std::size_t r = n % k;
  binning.bin_by_position.reserve(n);
  binning.bin_sizes.assign(k, 0);
  binning.bin_edges.assign(k, {0.0, 0.0});
  std::size_t pos = 0;
  for (std::size_t bin = 0; bin < k; ++bin) {
    const std::size_t size = q + (bin < r ? 1 : 0);
    binning.bin_sizes[bin] = size;
    binning.bin_edges[bin] = {binning.sorted_difficulty[pos],
                              binning.sorted_difficulty[pos + size - 1]};
    for (std::size_t s = 0; s < size; ++s, ++pos) {
      binning.bin_by_position.push_back(bin);
      binning.assignment.emplace(binning.order[pos], bin);
    }
  }
  if (binning.assignment.size() != n) {
    throw PreconditionError("bin_by_difficulty: duplicate item ids in input");
  }
  return binning;
}

std::string binning_to_csv(const DifficultyBinning& binning) {
  std::ostringstream out;
  out << "item_id,difficulty,bin\n";
  for (std::size_t pos = 0; pos < binning.order.size(); ++pos) {
    out << csv_escape(binning.order[pos]) << ',' << format_double(binning.sorted_difficulty[pos])
        << ',' << binning.bin_by_position[pos] << '\n';
  }
  return out.str();
}

DifficultyBinning binning_from_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || trim(line) != "item_id,difficulty,bin") {
    throw ParseError("bins file must start with header item_id,difficulty,bin");
  }
  std::vector<std::pair<std::string, double>> difficulties;
  std::vector<std::size_t> bins;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split_csv_line(line);
    if (fields.size() != 3) {
      throw ParseError("bins file row " + std::to_string(line_no) + ": expected 3 fields");
    }
    difficulties.emplace_back(fields[0],
                              parse_double(fields[1], "bins row " + std::to_string(line_no)));
    bins.push_back(static_cast<std::size_t>(
        parse_integer(fields[2], "bins row " + std::to_string(line_no))));
  }
  if (difficulties.empty()) {
    throw ParseError("bins file has no rows");
  }
  const std::size_t k = 1 + *std::max_element(bins.begin(), bins.end());
  DifficultyBinning binning = bin_by_difficulty(difficulties, k);
  // The file is authoritative; reject rows that disagree with the
  // recomputed assignment.
  for (std::size_t pos = 0; pos < difficulties.size(); ++pos) {
    if (difficulties[pos].first != binning.order[pos] ||
        bins[pos] != binning.bin_by_position[pos]) {
      throw ParseError("bins file is not in sorted order or disagrees with the remainder rule");
    }
  }
  return binning;
}

namespace {

// Fractional (average) ranks, 1-based.
std::vector<double> fractional_ranks(std::span<const double> values) {
  const std::size_t n = values.size();
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(),
            [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(n, 0.0);
  std::size_t pos = 0;
  while (pos < n) {
    std::size_t end = pos + 1;
    while (end < n && values[idx[end]] == values[idx[pos]]) {
      ++end;
    }
    // Ties share the average of the ranks they straddle.
    const double avg = 0.5 * static_cast<double>(pos + 1 + end);
    for (std::size_t t = pos; t < end; ++t) {
      ranks[idx[t]] = avg;
    }
    pos = end;
  }
  return ranks;
}

}  // namespace

double spearman(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) {
    throw PreconditionError("spearman: input lengths differ");
  }
  std::vector<double> xs, ys;
  xs.reserve(x.size());
  ys.reserve(y.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (std::isnan(x[i]) || std::isnan(y[i])) {
      continue;  // pairwise deletion
    }
    xs.push_back(x[i]);
    ys.push_back(y[i]);
  }
  const std::size_t n = xs.size();
  if (n < 2) {
    throw PreconditionError("spearman: undefined correlation (fewer than 2 pairs)");
  }

  const auto rx = fractional_ranks(xs);
  const auto ry = fractional_ranks(ys);

  // Exact boundary cases: identical or exactly reversed rankings.
  bool identical = true, reversed = true;
  const double rank_sum = static_cast<double>(n + 1);
  for (std::size_t i = 0; i < n; ++i) {
    identical = identical && rx[i] == ry[i];
    reversed = reversed && rx[i] + ry[i] == rank_sum;
  }

  const double mean = 0.5 * static_cast<double>(n + 1);
  double cov = 0.0, var_x = 0.0, var_y = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = rx[i] - mean;
    const double dy = ry[i] - mean;
    cov += dx * dy;
    var_x += dx * dx;
    var_y += dy * dy;
  }
  if (var_x == 0.0 || var_y == 0.0) {
    throw PreconditionError("spearman: undefined correlation (constant input)");
  }
  if (identical) return 1.0;
  if (reversed) return -1.0;
  const double rho = cov / std::sqrt(var_x * var_y);
  return std::clamp(rho, -1.0, 1.0);
}

CorrelationReport correlate_metrics(
    const std::vector<std::pair<std::string, double>>& difficulties, const MetricTable& table) {
  if (table.find("irt_difficulty") != nullptr) {
    throw PreconditionError("correlate_metrics: column name irt_difficulty is reserved");
  }
  std::unordered_map<std::string, double> difficulty_of;
  difficulty_of.reserve(difficulties.size());
  for (const auto& [id, value] : difficulties) {
    difficulty_of.emplace(id, value);
  }

  // Restrict to table rows with a known difficulty.
  std::vector<std::size_t> rows;
  std::vector<double> diff_column;
  for (std::size_t row = 0; row < table.row_count(); ++row) {
    const auto it = difficulty_of.find(table.item_ids[row]);
    if (it != difficulty_of.end()) {
      rows.push_back(row);
      diff_column.push_back(it->second);
    }
  }
  if (rows.empty()) {
    throw PreconditionError("correlate_metrics: no shared items between difficulties and table");
  }

  std::vector<std::pair<std::string, std::vector<double>>> series;
  series.emplace_back("irt_difficulty", std::move(diff_column));
  for (const auto& col : table.columns) {
    std::vector<double> values;
    values.reserve(rows.size());
    for (const std::size_t row : rows) {
      values.push_back(col.values[row]);
    }
    series.emplace_back(col.name, std::move(values));
  }

  CorrelationReport report;
  for (std::size_t a = 0; a < series.size(); ++a) {
    for (std::size_t b = a + 1; b < series.size(); ++b) {
      std::size_t pairs = 0;
      for (std::size_t i = 0; i < rows.size(); ++i) {
        if (!std::isnan(series[a].second[i]) && !std::isnan(series[b].second[i])) {
          ++pairs;
        }
      }
      try {
        const double rho = spearman(series[a].second, series[b].second);
        report.entries.push_back({series[a].first, series[b].first, rho, pairs});
      } catch (const PreconditionError&) {
        report.skipped.push_back(series[a].first + " vs " + series[b].first);
      }
    }
  }
  return report;
}

std::string correlation_report_to_json(const CorrelationReport& report) {
  nlohmann::ordered_json doc;
  doc["entries"] = nlohmann::ordered_json::array();
  for (const auto& e : report.entries) {
    doc["entries"].push_back(
        {{"metric_a", e.metric_a}, {"metric_b", e.metric_b}, {"rho", e.rho}, {"n", e.n}});
  }
  doc["skipped"] = report.skipped;
  return doc.dump(2) + "\n";
}

namespace {

std::size_t count_words(const std::string& text) {
  std::size_t words = 0;
  bool in_word = false;
  for (const char ch : text) {
    const bool space = std::isspace(static_cast<unsigned char>(ch)) != 0;
    if (!space && !in_word) {
      ++words;
    }
    in_word = !space;
  }
  return words;
}

std::size_t count_codepoints(const std::string& text) {
  std::size_t count = 0;
  for (const char ch : text) {
    // Every UTF-8 scalar contributes exactly one non-continuation byte.
    if ((static_cast<unsigned char>(ch) & 0xC0) != 0x80) {
      ++count;
    }
  }
  return count;
}

}  // namespace

MetricTable derive_text_metrics(const std::vector<std::pair<std::string, TextItem>>& items) {
  MetricTable table;
  MetricColumn question_len{"question_length_words", ColumnKind::Numeric, {}, {}};
  MetricColumn answer_len{"answer_length_chars", ColumnKind::Numeric, {}, {}};
  for (const auto& [id, text] : items) {
    table.item_ids.push_back(id);
    question_len.values.push_back(
        text.question ? static_cast<double>(count_words(*text.question)) : kMissing);
    answer_len.values.push_back(
        text.answer ? static_cast<double>(count_codepoints(*text.answer)) : kMissing);
  }
  table.columns.push_back(std::move(question_len));
  table.columns.push_back(std::move(answer_len));
  return table;
}

ValidationReport holdout_validation(const std::vector<ResponseRecord>& holdout,
                                    const DifficultyBinning& binning) {
  ValidationReport report;
  const std::size_t k = binning.k;
  std::vector<std::size_t> correct(k, 0), total(k, 0);
  for (const auto& rec : holdout) {
    const auto it = binning.assignment.find(rec.item_id);
    if (it == binning.assignment.end()) {
      ++report.unknown_items;
      continue;
    }
    ++total[it->second];
    correct[it->second] += static_cast<std::size_t>(rec.correct);
  }

  report.per_bin_counts = total;
  report.per_bin_accuracy.assign(k, kMissing);
  std::vector<double> covered_bins, covered_acc;
  for (std::size_t bin = 0; bin < k; ++bin) {
    if (total[bin] == 0) {
      continue;
    }
    const double acc = static_cast<double>(correct[bin]) / static_cast<double>(total[bin]);
    report.per_bin_accuracy[bin] = acc;
    covered_bins.push_back(static_cast<double>(bin));
    covered_acc.push_back(acc);
  }
  if (covered_bins.empty()) {
    throw PreconditionError("holdout_validation: no bin is covered by the holdout records");
  }

  for (std::size_t bin = 0; bin + 1 < k; ++bin) {
    if (total[bin] > 0 && total[bin + 1] > 0 &&
        report.per_bin_accuracy[bin + 1] > report.per_bin_accuracy[bin]) {
      ++report.violations;
    }
  }

  try {
    report.monotonicity_rho = spearman(covered_bins, covered_acc);
  } catch (const PreconditionError&) {
    report.monotonicity_rho.reset();  // constant accuracy or a single bin
  }
  return report;
}

std::string validation_report_to_json(const ValidationReport& report) {
  nlohmann::ordered_json doc;
  auto acc = nlohmann::ordered_json::array();
  for (const double a : report.per_bin_accuracy) {
    if (std::isnan(a)) {
      acc.push_back(nullptr);
    } else {
      acc.push_back(a);
    }
  }
  doc["per_bin_accuracy"] = std::move(acc);
  doc["per_bin_counts"] = report.per_bin_counts;
  if (report.monotonicity_rho) {
    doc["monotonicity_rho"] = *report.monotonicity_rho;
  } else {
    doc["monotonicity_rho"] = nullptr;
  }
  doc["violations"] = report.violations;
  doc["unknown_items"] = report.unknown_items;
  return doc.dump(2) + "\n";
}

ContingencyTable difficulty_distribution(const DifficultyBinning& binning,
                                         const MetricTable& table,
                                         const std::string& column_name) {
  const MetricColumn* col = table.find(column_name);
  if (col == nullptr) {
    throw PreconditionError("difficulty_distribution: no column named " + column_name);
  }

  // Category labels: declared order for ordinal columns; distinct sorted
  // integers for integer-valued numeric columns.
  std::vector<std::string> labels;
  std::unordered_map<long long, std::size_t> numeric_row;
  if (col->kind == ColumnKind::Ordinal) {
    labels = col->categories;
  } else {
    std::vector<long long> distinct;
    for (std::size_t row = 0; row < table.row_count(); ++row) {
      const double v = col->values[row];
      if (std::isnan(v)) continue;
      if (v != std::floor(v)) {
        throw PreconditionError("difficulty_distribution: column " + column_name +
                                " is numeric but not integer-valued");
      }
      distinct.push_back(static_cast<long long>(v));
    }
    std::sort(distinct.begin(), distinct.end());
    distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
    for (const long long v : distinct) {
      numeric_row.emplace(v, labels.size());
      labels.push_back(std::to_string(v));
    }
  }

  std::unordered_map<std::string, std::size_t> table_row;
  for (std::size_t row = 0; row < table.row_count(); ++row) {
    table_row.emplace(table.item_ids[row], row);
  }

  ContingencyTable result;
  result.k = binning.k;
  result.row_labels = labels;
  result.row_labels.push_back("unassigned");
  result.counts.assign(result.row_labels.size(), std::vector<std::size_t>(binning.k, 0));

  std::size_t unassigned_total = 0;
  for (std::size_t pos = 0; pos < binning.order.size(); ++pos) {
    const std::size_t bin = binning.bin_by_position[pos];
    const auto it = table_row.find(binning.order[pos]);
    double value = kMissing;
    if (it != table_row.end()) {
      value = col->values[it->second];
    }
    if (std::isnan(value)) {
      ++result.counts.back()[bin];
      ++unassigned_total;
      continue;
    }
    std::size_t row;
    if (col->kind == ColumnKind::Ordinal) {
      row = static_cast<std::size_t>(value);
    } else {
      row = numeric_row.at(static_cast<long long>(value));
    }
    ++result.counts[row][bin];
  }

  if (unassigned_total == 0) {
    result.row_labels.pop_back();
    result.counts.pop_back();
  }
  return result;
}

}  // namespace irtgrid

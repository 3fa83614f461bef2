#include "irtgrid/response.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "irtgrid/csv.hpp"
#include "irtgrid/errors.hpp"

namespace irtgrid {

namespace {

using nlohmann::json;

// Not skippable in lenient mode.
struct OutOfRangeCorrect : ParseError {
  using ParseError::ParseError;
};

ResponseRecord record_from_line(const std::string& line, std::size_t line_no) {
  json obj;
  try {
    obj = json::parse(line);
  } catch (const json::parse_error& e) {
    throw ParseError("invalid JSON at line " + std::to_string(line_no) + ": " + e.what());
  }
  if (!obj.is_object()) {
    throw ParseError("expected an object at line " + std::to_string(line_no));
  }
  ResponseRecord rec;
  if (!obj.contains("model") || !obj["model"].is_string() || !obj.contains("item") ||
      !obj["item"].is_string()) {
    throw ParseError("missing model/item string fields at line " + std::to_string(line_no));
  }
  rec.model_id = trim(obj["model"].get<std::string>());
  rec.item_id = trim(obj["item"].get<std::string>());
  if (rec.model_id.empty() || rec.item_id.empty()) {
    throw ParseError("empty model or item id at line " + std::to_string(line_no));
  }
  if (!obj.contains("correct") || !obj["correct"].is_number_integer()) {
    throw ParseError("missing integer correct field at line " + std::to_string(line_no));
  }
  const auto correct = obj["correct"].get<long long>();
  if (correct != 0 && correct != 1) {
    // Corrupt data, not a formatting hiccup.
    throw OutOfRangeCorrect("correct out of range at line " + std::to_string(line_no));
  }
  rec.correct = static_cast<int>(correct);
  if (obj.contains("dataset")) {
    if (!obj["dataset"].is_string()) {
      throw ParseError("dataset must be a string at line " + std::to_string(line_no));
    }
    rec.dataset = obj["dataset"].get<std::string>();
  }
  return rec;
}

}  // namespace

ParseResult parse_response_records(std::istream& in, ParseMode mode) {
  ParseResult result;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) {
      continue;
    }
    try {
      result.records.push_back(record_from_line(line, line_no));
    } catch (const OutOfRangeCorrect&) {
      throw;
    } catch (const ParseError&) {
      if (mode == ParseMode::Strict) {
        throw;
      }
      ++result.skipped_lines;
    }
  }
  return result;
}

ParseResult parse_response_file(const std::string& path, ParseMode mode) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw ParseError("cannot open response file: " + path);
  }
  return parse_response_records(in, mode);
}

void write_response_records(std::ostream& out, const std::vector<ResponseRecord>& records) {
  for (const auto& rec : records) {
    nlohmann::ordered_json obj;
    obj["model"] = rec.model_id;
    obj["item"] = rec.item_id;
    obj["correct"] = rec.correct;
    if (rec.dataset) {
      obj["dataset"] = *rec.dataset;
    }
    out << obj.dump() << '\n';
  }
}

std::string response_records_to_string(const std::vector<ResponseRecord>& records) {
  std::ostringstream out;
  write_response_records(out, records);
  return out.str();
}

BuildResult build_matrix(const std::vector<ResponseRecord>& records, const BuildOptions& opts) {
  if (records.empty()) {
    throw PreconditionError("build_matrix: no records");
  }

  BuildResult result;

  // Deduplicate on (model, item), keeping the first occurrence.
  struct Entry {
    std::string model, item;
    std::uint8_t correct;
  };
  std::vector<Entry> entries;
  entries.reserve(records.size());
  std::unordered_map<std::string, std::size_t> seen;  // "model\x1fitem" -> entry index
  for (const auto& rec : records) {
    if (rec.correct != 0 && rec.correct != 1) {
      throw ParseError("build_matrix: correct out of range for model " + rec.model_id);
    }
    if (rec.model_id.empty() || rec.item_id.empty()) {
      throw ParseError("build_matrix: empty model or item id");
    }
    std::string key = rec.model_id + '\x1f' + rec.item_id;
    auto [it, inserted] = seen.emplace(std::move(key), entries.size());
    if (!inserted) {
      ++result.duplicates_dropped;
      const bool conflict = entries[it->second].correct != rec.correct;
      if (conflict) {
        ++result.duplicate_conflicts;
        if (opts.duplicates == DuplicatePolicy::Error) {
          throw PreconditionError("build_matrix: conflicting duplicate for (" + rec.model_id +
                                  ", " + rec.item_id + ")");
        }
      }
      if (opts.duplicates == DuplicatePolicy::Error) {
        throw PreconditionError("build_matrix: duplicate observation for (" + rec.model_id +
                                ", " + rec.item_id + ")");
      }
      continue;
    }
    entries.push_back({rec.model_id, rec.item_id, static_cast<std::uint8_t>(rec.correct)});
  }

  // Iterated threshold filtering until a fixed point.
  std::vector<char> alive(entries.size(), 1);
  bool changed = true;
  while (changed) {
    changed = false;
    std::unordered_map<std::string, std::size_t> model_obs, item_obs;
    for (std::size_t i = 0; i < entries.size(); ++i) {
      if (!alive[i]) continue;
      ++model_obs[entries[i].model];
      ++item_obs[entries[i].item];
    }
    for (std::size_t i = 0; i < entries.size(); ++i) {
      if (!alive[i]) continue;
      if (model_obs[entries[i].model] < opts.min_model_obs ||
          item_obs[entries[i].item] < opts.min_item_obs) {
        alive[i] = 0;
        changed = true;
      }
    }
  }

  // Index surviving models/items in first-appearance order.
  std::unordered_map<std::string, std::uint32_t> model_index, item_index;
  ResponseMatrix& m = result.matrix;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    if (!alive[i]) continue;
    auto [mit, m_new] = model_index.emplace(entries[i].model,
                                            static_cast<std::uint32_t>(m.models.size()));
    if (m_new) m.models.push_back(entries[i].model);
    auto [iit, i_new] = item_index.emplace(entries[i].item,
                                           static_cast<std::uint32_t>(m.items.size()));
    if (i_new) m.items.push_back(entries[i].item);
    m.observations.push_back({mit->second, iit->second, entries[i].correct});
  }

  if (m.observations.empty()) {
    throw PreconditionError("build_matrix: no data above thresholds");
  }

  // Removed = distinct in input minus surviving; counts models that lost
  // all observations through item filtering too, and vice versa.
  std::unordered_set<std::string> all_models, all_items;
  for (const auto& entry : entries) {
    all_models.insert(entry.model);
    all_items.insert(entry.item);
  }
  result.models_removed = all_models.size() - m.models.size();
  result.items_removed = all_items.size() - m.items.size();
  if (records.front().dataset) {
    m.dataset_tag = records.front().dataset;
  }
  return result;
}

MatrixSummary matrix_stats(const ResponseMatrix& matrix) {
  MatrixSummary s;
  const std::size_t n_models = matrix.model_count();
  const std::size_t n_items = matrix.item_count();
  std::vector<std::size_t> item_obs(n_items, 0), item_correct(n_items, 0);
  std::vector<std::size_t> model_obs(n_models, 0), model_correct(n_models, 0);
  for (const auto& obs : matrix.observations) {
    ++item_obs[obs.item];
    ++model_obs[obs.model];
    item_correct[obs.item] += obs.correct;
    model_correct[obs.model] += obs.correct;
  }
  const double cells = static_cast<double>(n_models) * static_cast<double>(n_items);
  s.density = cells > 0 ? static_cast<double>(matrix.observations.size()) / cells : 0.0;
  s.item_facility.resize(n_items, 0.0);
  s.model_accuracy.resize(n_models, 0.0);
  for (std::size_t i = 0; i < n_items; ++i) {
    if (item_obs[i] == 0) continue;
    s.item_facility[i] = static_cast<double>(item_correct[i]) / static_cast<double>(item_obs[i]);
    if (item_correct[i] == 0 || item_correct[i] == item_obs[i]) {
      s.degenerate_items.push_back(matrix.items[i]);
    }
  }
  for (std::size_t j = 0; j < n_models; ++j) {
    if (model_obs[j] == 0) continue;
    s.model_accuracy[j] = static_cast<double>(model_correct[j]) / static_cast<double>(model_obs[j]);
  }
  return s;
}

std::vector<ResponseRecord> matrix_to_records(const ResponseMatrix& matrix) {
  std::vector<ResponseRecord> records;
  records.reserve(matrix.observations.size());
  for (const auto& obs : matrix.observations) {
    ResponseRecord rec;
    rec.model_id = matrix.models[obs.model];
    rec.item_id = matrix.items[obs.item];
    rec.correct = obs.correct;
    rec.dataset = matrix.dataset_tag;
    records.push_back(std::move(rec));
  }
  return records;
}

HoldoutSplit split_holdout(const std::vector<ResponseRecord>& records,
                           const std::set<std::string>& holdout_models) {
  if (holdout_models.empty()) {
    throw PreconditionError("split_holdout: holdout model set is empty");
  }
  HoldoutSplit split;
  for (const auto& rec : records) {
    if (holdout_models.count(rec.model_id)) {
      split.holdout.push_back(rec);
    } else {
      split.fit.push_back(rec);
    }
  }
  return split;
}

}  // namespace irtgrid

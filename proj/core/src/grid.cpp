#include "irtgrid/grid.hpp"

#include <cmath>
#include <sstream>
#include <unordered_map>

#include "irtgrid/csv.hpp"
#include "irtgrid/errors.hpp"
#include "irtgrid/irt.hpp"
#include "irtgrid/rng.hpp"

namespace irtgrid {

namespace {

void check_unit_interval(double v, const char* what) {
  if (!(v >= 0.0 && v <= 1.0)) {
    throw PreconditionError(std::string(what) + " out of [0, 1]: " + format_double(v));
  }
}

}  // namespace

GeneralizationGrid build_grid(std::vector<std::vector<double>> acc, std::vector<double> zeroshot,
                              bool mask_diagonal) {
  const std::size_t k = acc.size();
  if (k == 0 || zeroshot.size() != k) {
    throw PreconditionError("build_grid: dimension mismatch between acc and zeroshot");
  }
  for (const auto& row : acc) {
    if (row.size() != k) {
      throw PreconditionError("build_grid: acc is not square");
    }
    for (const double v : row) check_unit_interval(v, "accuracy");
  }
  for (const double v : zeroshot) check_unit_interval(v, "zeroshot accuracy");

  GeneralizationGrid grid;
  grid.k = k;
  grid.acc = std::move(acc);
  grid.zeroshot = std::move(zeroshot);
  grid.mask_diagonal = mask_diagonal;
  grid.improvement.assign(k, std::vector<double>(k, 0.0));
  for (std::size_t t = 0; t < k; ++t) {
    for (std::size_t e = 0; e < k; ++e) {
      grid.improvement[t][e] = grid.acc[t][e] - grid.zeroshot[e];
    }
  }
  return grid;
}

GapProfile gap_decay(const GeneralizationGrid& grid) {
  const int k = static_cast<int>(grid.k);
  GapProfile profile;
  for (int g = -(k - 1); g <= k - 1; ++g) {
    if (g == 0 && grid.mask_diagonal) {
      continue;
    }
    double sum = 0.0;
    std::size_t count = 0;
    for (int t = 0; t < k; ++t) {
      const int e = t + g;
      if (e < 0 || e >= k) continue;
      sum += grid.improvement[static_cast<std::size_t>(t)][static_cast<std::size_t>(e)];
      ++count;
    }
    profile.gaps.push_back(g);
    profile.counts.push_back(count);
    profile.mean_improvement.push_back(count > 0 ? sum / static_cast<double>(count)
                                                 : std::nan(""));
  }
  return profile;
}

void EffectModel::validate() const {
  if (kind == Kind::Locality && !(width > 0.0)) {
    throw PreconditionError("EffectModel: locality width must be > 0");
  }
  if (!std::isfinite(gain)) {
    throw PreconditionError("EffectModel: gain must be finite");
  }
}

GeneralizationGrid simulate_experiment(std::span<const double> ability_pool,
                                       const std::vector<std::pair<std::string, double>>& betas,
                                       const DifficultyBinning& binning,
                                       const EffectModel& effect, std::size_t students_per_cell,
                                       std::uint64_t seed) {
  effect.validate();
  if (students_per_cell < 1) {
    throw PreconditionError("simulate_experiment: students_per_cell must be >= 1");
  }
  if (ability_pool.empty()) {
    throw PreconditionError("simulate_experiment: empty ability pool");
  }

  std::unordered_map<std::string, double> beta_of;
  beta_of.reserve(betas.size());
  for (const auto& [id, b] : betas) beta_of.emplace(id, b);

  const std::size_t k = binning.k;
  std::vector<std::vector<double>> bin_betas(k);
  for (std::size_t pos = 0; pos < binning.order.size(); ++pos) {
    const auto it = beta_of.find(binning.order[pos]);
    if (it == beta_of.end()) {
      throw PreconditionError("simulate_experiment: no difficulty for item " +
                              binning.order[pos]);
    }
    bin_betas[binning.bin_by_position[pos]].push_back(it->second);
  }

  const auto cell_accuracy = [&](std::uint64_t cell_seed, std::size_t test_bin, double shift) {
    Rng rng(cell_seed);
    std::size_t correct = 0, total = 0;
    for (std::size_t s = 0; s < students_per_cell; ++s) {
      const double ability =
          ability_pool[rng.uniform_below(ability_pool.size())] + shift;
      for (const double beta : bin_betas[test_bin]) {
        const double p = sigmoid(ability - beta);
        correct += rng.uniform() < p ? 1 : 0;
        ++total;
      }
    }
    return static_cast<double>(correct) / static_cast<double>(total);
  };

  std::vector<double> zeroshot(k, 0.0);
  for (std::size_t e = 0; e < k; ++e) {
    // Stream (seed, k, e) is reserved for the unshifted baseline.
    zeroshot[e] = cell_accuracy(mix_seed(seed, k, e), e, 0.0);
  }

  std::vector<std::vector<double>> acc(k, std::vector<double>(k, 0.0));
  for (std::size_t t = 0; t < k; ++t) {
    for (std::size_t e = 0; e < k; ++e) {
      const double gap = std::abs(static_cast<double>(e) - static_cast<double>(t));
      const double shift = effect.kind == EffectModel::Kind::Uniform
                               ? effect.gain
                               : effect.gain * std::exp(-gap / effect.width);
      acc[t][e] = cell_accuracy(mix_seed(seed, t, e), e, shift);
    }
  }
  return build_grid(std::move(acc), std::move(zeroshot), true);
}

std::string export_grid_csv(const GeneralizationGrid& grid) {
  std::ostringstream out;
  out << "train\\test";
  for (std::size_t e = 0; e < grid.k; ++e) out << ',' << e;
  out << '\n';
  for (std::size_t t = 0; t < grid.k; ++t) {
    out << t;
    for (std::size_t e = 0; e < grid.k; ++e) out << ',' << format_double(grid.acc[t][e]);
    out << '\n';
  }
  out << "zeroshot";
  for (std::size_t e = 0; e < grid.k; ++e) out << ',' << format_double(grid.zeroshot[e]);
  out << '\n';
  return out.str();
}

std::string export_improvement_csv(const GeneralizationGrid& grid) {
  std::ostringstream out;
  out << "train\\test";
  for (std::size_t e = 0; e < grid.k; ++e) out << ',' << e;
  out << '\n';
  for (std::size_t t = 0; t < grid.k; ++t) {
    out << t;
    for (std::size_t e = 0; e < grid.k; ++e) {
      if (grid.mask_diagonal && t == e) {
        out << ",masked";
      } else {
        out << ',' << format_double(grid.improvement[t][e]);
      }
    }
    out << '\n';
  }
  return out.str();
}

GeneralizationGrid import_grid_csv(const std::string& text, bool mask_diagonal) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) {
    throw ParseError("grid file is empty");
  }
  const auto header = split_csv_line(trim(line));
  if (header.empty() || header[0] != "train\\test") {
    throw ParseError("grid file must start with a train\\test header");
  }
  const std::size_t k = header.size() - 1;
  if (k == 0) {
    throw ParseError("grid file header has no test-bin columns");
  }
  for (std::size_t e = 0; e < k; ++e) {
    if (parse_integer(header[e + 1], "grid header") != static_cast<long long>(e)) {
      throw ParseError("grid file header: test bins must be 0.." + std::to_string(k - 1));
    }
  }

  std::vector<std::vector<double>> acc;
  std::vector<double> zeroshot;
  std::size_t line_no = 1;
  bool saw_zeroshot = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split_csv_line(line);
    if (fields.size() != k + 1) {
      throw ParseError("grid file row " + std::to_string(line_no) + ": expected " +
                       std::to_string(k + 1) + " fields, got " + std::to_string(fields.size()));
    }
    std::vector<double> values;
    values.reserve(k);
    for (std::size_t e = 0; e < k; ++e) {
      values.push_back(
          parse_double(fields[e + 1], "grid row " + std::to_string(line_no) + ", column " +
                                          std::to_string(e)));
    }
    if (trim(fields[0]) == "zeroshot") {
      if (saw_zeroshot) {
        throw ParseError("grid file row " + std::to_string(line_no) + ": duplicate zeroshot row");
      }
      zeroshot = std::move(values);
      saw_zeroshot = true;
      continue;
    }
    if (saw_zeroshot) {
      throw ParseError("grid file row " + std::to_string(line_no) +
                       ": accuracy row after the zeroshot row");
    }
    if (parse_integer(fields[0], "grid row label") != static_cast<long long>(acc.size())) {
      throw ParseError("grid file row " + std::to_string(line_no) + ": train bins must be 0.." +
                       std::to_string(k - 1) + " in order");
    }
    acc.push_back(std::move(values));
  }
  if (acc.size() != k) {
    throw ParseError("grid file has " + std::to_string(acc.size()) + " accuracy rows, expected " +
                     std::to_string(k));
  }
  if (!saw_zeroshot) {
    throw ParseError("grid file is missing the zeroshot row");
  }
  try {
    return build_grid(std::move(acc), std::move(zeroshot), mask_diagonal);
  } catch (const PreconditionError& e) {
    // Out-of-range cells in a file are malformed input, not a caller bug.
    throw ParseError(std::string("grid file: ") + e.what());
  }
}

}  // namespace irtgrid

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "irtgrid/analysis.hpp"

namespace irtgrid {

/// K x K cross-difficulty generalization grid. acc[t][e] is the accuracy of
/// the model trained on bin t evaluated on bin e; improvement subtracts the
/// zero-shot baseline of the test bin. Masking flags the diagonal for
/// analysis and export; the raw values stay in memory.
struct GeneralizationGrid {
  std::size_t k = 0;
  std::vector<std::vector<double>> acc;
  std::vector<double> zeroshot;
  std::vector<std::vector<double>> improvement;
  bool mask_diagonal = true;
  std::vector<std::string> labels;  // optional dataset/model names

  friend bool operator==(const GeneralizationGrid&, const GeneralizationGrid&) = default;
};

GeneralizationGrid build_grid(std::vector<std::vector<double>> acc, std::vector<double> zeroshot,
                              bool mask_diagonal = true);

/// Mean improvement grouped by signed gap g = test bin - train bin.
/// Diagonal cells are excluded when the grid is masked, so counts sum to
/// K^2 - K (masked) or K^2 (unmasked).
struct GapProfile {
  std::vector<int> gaps;                  // ascending
  std::vector<double> mean_improvement;   // aligned with gaps
  std::vector<std::size_t> counts;        // aligned with gaps
};

GapProfile gap_decay(const GeneralizationGrid& grid);

struct EffectModel {
  enum class Kind { Locality, Uniform };
  Kind kind = Kind::Locality;
  double gain = 0.5;   // g0; ability shift on the training bin itself
  double width = 1.0;  // w; locality decay scale in bins

  void validate() const;
};

/// End-to-end simulation: for each (train bin t, test bin e) cell, draws
/// students from the given ability pool, shifts their ability by
/// gain * exp(-|e - t| / width) (locality) or gain (uniform), and samples
/// responses on the test bin's items via the 1PL curve. The zero-shot
/// baseline uses unshifted students. Cells use independent seed streams
/// derived from (seed, t, e), so results do not depend on evaluation order.
GeneralizationGrid simulate_experiment(std::span<const double> ability_pool,
                                       const std::vector<std::pair<std::string, double>>& betas,
                                       const DifficultyBinning& binning,
                                       const EffectModel& effect, std::size_t students_per_cell,
                                       std::uint64_t seed);

/// Accuracy file: header "train\test" + K columns, K accuracy rows, one
/// trailing zeroshot row. Shortest round-trip doubles, lossless.
std::string export_grid_csv(const GeneralizationGrid& grid);

/// Improvement file: same header, K rows, masked diagonal cells exported
/// as the literal token "masked".
std::string export_improvement_csv(const GeneralizationGrid& grid);

GeneralizationGrid import_grid_csv(const std::string& text, bool mask_diagonal = true);

}  // namespace irtgrid

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "irtgrid/irt.hpp"
#include "irtgrid/response.hpp"

namespace irtgrid {

enum class CurveVariant { OnePL, TwoPL, ThreePL, FourPL };

/// Distributions for the synthetic ground truth. Abilities and difficulties
/// are Gaussian; discrimination is log-normal; asymptotes are uniform on
/// their declared intervals.
struct SamplerSpec {
  double theta_mean = 0.0, theta_sd = 1.0;
  double beta_mean = 0.0, beta_sd = 1.0;
  double log_alpha_mean = 0.0, log_alpha_sd = 0.5;  // 2PL and up
  double c_min = 0.0, c_max = 0.3;                  // 3PL and up
  double d_min = 0.7, d_max = 1.0;                  // 4PL

  void validate() const;  // throws PreconditionError
};

struct SyntheticData {
  std::vector<std::string> model_ids;  // m0000, m0001, ...
  std::vector<std::string> item_ids;   // q0000, q0001, ...
  std::vector<double> thetas;          // true abilities, per model
  std::vector<ItemParams> items;       // true item parameters, per item
  std::vector<ResponseRecord> records;
};

/// Samples ground-truth parameters, picks round(density * M * N) cells
/// uniformly without replacement, and draws each picked cell
/// Bernoulli(icc). Records come out in row-major cell order. Deterministic
/// for a fixed seed.
SyntheticData generate_synthetic(std::size_t n_models, std::size_t n_items, CurveVariant variant,
                                 const SamplerSpec& spec, double density, std::uint64_t seed);

}  // namespace irtgrid

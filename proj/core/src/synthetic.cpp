#include "irtgrid/synthetic.hpp"

#include <algorithm>
#include <cmath>

#include "irtgrid/errors.hpp"
#include "irtgrid/rng.hpp"

namespace irtgrid {

namespace {

std::vector<std::string> make_ids(char prefix, std::size_t count) {
  int width = 1;
  for (std::size_t p = 10; p < count; p *= 10) {
    ++width;
  }
  std::vector<std::string> ids;
  ids.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    std::string digits = std::to_string(i);
    std::string id(1, prefix);
    id.append(static_cast<std::size_t>(width) - digits.size(), '0');
    id += digits;
    ids.push_back(std::move(id));
  }
  return ids;
}

}  // namespace

void SamplerSpec::validate() const {
  if (!(theta_sd > 0.0) || !(beta_sd > 0.0) || !(log_alpha_sd > 0.0)) {
    throw PreconditionError("SamplerSpec: standard deviations must be positive");
  }
  if (!(0.0 <= c_min && c_min <= c_max && c_max < 1.0)) {
    throw PreconditionError("SamplerSpec: need 0 <= c_min <= c_max < 1");
  }
  if (!(0.0 < d_min && d_min <= d_max && d_max <= 1.0)) {
    throw PreconditionError("SamplerSpec: need 0 < d_min <= d_max <= 1");
  }
  if (c_max >= d_min) {
    throw PreconditionError("SamplerSpec: asymptote ranges overlap (c_max >= d_min)");
  }
}

SyntheticData generate_synthetic(std::size_t n_models, std::size_t n_items, CurveVariant variant,
                                 const SamplerSpec& spec, double density, std::uint64_t seed) {
  if (n_models < 1 || n_items < 1) {
    throw PreconditionError("generate_synthetic: need at least one model and one item");
  }
  if (!(density > 0.0 && density <= 1.0)) {
    throw PreconditionError("generate_synthetic: density must be in (0, 1]");
  }
  spec.validate();

  Rng rng(seed);
  SyntheticData data;
  data.model_ids = make_ids('m', n_models);
  data.item_ids = make_ids('q', n_items);

  data.thetas.reserve(n_models);
  for (std::size_t j = 0; j < n_models; ++j) {
    data.thetas.push_back(spec.theta_mean + spec.theta_sd * rng.normal());
  }

  data.items.reserve(n_items);
  for (std::size_t i = 0; i < n_items; ++i) {
    ItemParams p;
    p.beta = spec.beta_mean + spec.beta_sd * rng.normal();
    if (variant != CurveVariant::OnePL) {
      p.alpha = std::exp(spec.log_alpha_mean + spec.log_alpha_sd * rng.normal());
    }
    if (variant == CurveVariant::ThreePL || variant == CurveVariant::FourPL) {
      p.c = spec.c_min + (spec.c_max - spec.c_min) * rng.uniform();
    }
    if (variant == CurveVariant::FourPL) {
      p.d = spec.d_min + (spec.d_max - spec.d_min) * rng.uniform();
    }
    p.validate();
    data.items.push_back(p);
  }

  const std::size_t total = n_models * n_items;
  const auto n_obs = static_cast<std::size_t>(std::llround(density * static_cast<double>(total)));

  // Partial Fisher-Yates, then row-major order for the emitted records.
  std::vector<std::size_t> cells(total);
  for (std::size_t k = 0; k < total; ++k) {
    cells[k] = k;
  }
  for (std::size_t k = 0; k < n_obs && k + 1 < total; ++k) {
    const std::size_t swap_with = k + static_cast<std::size_t>(rng.uniform_below(total - k));
    std::swap(cells[k], cells[swap_with]);
  }
  cells.resize(n_obs);
  std::sort(cells.begin(), cells.end());

  data.records.reserve(n_obs);
  for (const std::size_t cell : cells) {
    const std::size_t j = cell / n_items;  // model row
    const std::size_t i = cell % n_items;  // item column
    const double p = icc(data.thetas[j], data.items[i]);
    ResponseRecord rec;
    rec.model_id = data.model_ids[j];
    rec.item_id = data.item_ids[i];
    rec.correct = rng.uniform() < p ? 1 : 0;
    data.records.push_back(std::move(rec));
  }
  return data;
}

}  // namespace irtgrid

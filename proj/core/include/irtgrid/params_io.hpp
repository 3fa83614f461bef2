#pragma once

#include <string>

#include "irtgrid/svi.hpp"

namespace irtgrid {

/// Parameter file: a single JSON document with format version, variant,
/// priors, config snapshot, seed, convergence flag, final ELBO and the
/// per-model / per-item posterior (mean, sd) keyed by original string ids.
/// Doubles are emitted in shortest round-trip form, so write/read is
/// lossless and byte-stable for identical fits.
std::string params_to_json(const IrtFit& fit);
IrtFit params_from_json(const std::string& text);

void write_params_file(const std::string& path, const IrtFit& fit);  // atomic
IrtFit read_params_file(const std::string& path);

/// Item (id, posterior-mean difficulty) pairs in fit order; the difficulty
/// input of the binning and correlation stages.
std::vector<std::pair<std::string, double>> difficulties_from_fit(const IrtFit& fit);

}  // namespace irtgrid

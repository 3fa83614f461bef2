#include "irtgrid/params_io.hpp"

#include <nlohmann/json.hpp>

#include "irtgrid/errors.hpp"
#include "irtgrid/fsio.hpp"

namespace irtgrid {

namespace {

using ordered_json = nlohmann::ordered_json;

constexpr int kFormatVersion = 1;

ordered_json posterior_block(const std::vector<std::string>& ids,
                             const std::vector<PosteriorGaussian>& gs) {
  ordered_json block = ordered_json::object();
  for (std::size_t k = 0; k < ids.size(); ++k) {
    block[ids[k]] = {{"mean", gs[k].mean}, {"sd", gs[k].sd}};
  }
  return block;
}

void read_posterior_block(const ordered_json& block, std::vector<std::string>& ids,
                          std::vector<PosteriorGaussian>& gs) {
  for (const auto& [id, entry] : block.items()) {
    ids.push_back(id);
    gs.push_back({entry.at("mean").get<double>(), entry.at("sd").get<double>()});
  }
}

}  // namespace

std::string params_to_json(const IrtFit& fit) {
  ordered_json doc;
  doc["format_version"] = kFormatVersion;
  doc["variant"] = to_string(fit.variant);
  doc["priors"] = {{"theta_mean", fit.priors.theta_mean}, {"theta_sd", fit.priors.theta_sd},
                   {"beta_mean", fit.priors.beta_mean},   {"beta_sd", fit.priors.beta_sd},
                   {"log_alpha_mean", fit.priors.log_alpha_mean},
                   {"log_alpha_sd", fit.priors.log_alpha_sd}};
  doc["config"] = {{"epochs", fit.config.epochs},
                   {"learning_rate", fit.config.learning_rate},
                   {"batch_size", fit.config.batch_size},
                   {"mc_samples", fit.config.mc_samples},
                   {"tolerance", fit.config.tolerance},
                   {"patience", fit.config.patience},
                   {"deterministic", fit.config.deterministic}};
  doc["seed"] = fit.config.seed;
  doc["converged"] = fit.converged;
  doc["final_elbo"] = fit.final_elbo();
  doc["epochs_run"] = fit.elbo_trace.size();
  doc["models"] = posterior_block(fit.model_ids, fit.theta);
  doc["items"] = posterior_block(fit.item_ids, fit.beta);
  if (fit.variant == IrtVariant::TwoPL) {
    doc["item_log_discrimination"] = posterior_block(fit.item_ids, fit.log_alpha);
  }
  return doc.dump(2) + "\n";
}

IrtFit params_from_json(const std::string& text) {
  ordered_json doc;
  try {
    doc = ordered_json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("invalid parameter file: ") + e.what());
  }
  try {
    if (doc.at("format_version").get<int>() != kFormatVersion) {
      throw ParseError("unsupported parameter file version");
    }
    IrtFit fit;
    fit.variant = variant_from_string(doc.at("variant").get<std::string>());
    const auto& priors = doc.at("priors");
    fit.priors.theta_mean = priors.at("theta_mean").get<double>();
    fit.priors.theta_sd = priors.at("theta_sd").get<double>();
    fit.priors.beta_mean = priors.at("beta_mean").get<double>();
    fit.priors.beta_sd = priors.at("beta_sd").get<double>();
    fit.priors.log_alpha_mean = priors.at("log_alpha_mean").get<double>();
    fit.priors.log_alpha_sd = priors.at("log_alpha_sd").get<double>();
    const auto& config = doc.at("config");
    fit.config.variant = fit.variant;
    fit.config.epochs = config.at("epochs").get<std::size_t>();
    fit.config.learning_rate = config.at("learning_rate").get<double>();
    fit.config.batch_size = config.at("batch_size").get<std::size_t>();
    fit.config.mc_samples = config.at("mc_samples").get<std::size_t>();
    fit.config.tolerance = config.at("tolerance").get<double>();
    fit.config.patience = config.at("patience").get<std::size_t>();
    fit.config.deterministic = config.at("deterministic").get<bool>();
    fit.config.seed = doc.at("seed").get<std::uint64_t>();
    fit.converged = doc.at("converged").get<bool>();
    read_posterior_block(doc.at("models"), fit.model_ids, fit.theta);
    read_posterior_block(doc.at("items"), fit.item_ids, fit.beta);
    if (fit.variant == IrtVariant::TwoPL) {
      std::vector<std::string> ids;
      read_posterior_block(doc.at("item_log_discrimination"), ids, fit.log_alpha);
      if (ids != fit.item_ids) {
        throw ParseError("parameter file: discrimination ids do not match item ids");
      }
    }
    // The trace itself is not persisted; keep the final value so
    // final_elbo() round-trips.
    if (!doc.at("final_elbo").is_null()) {
      fit.elbo_trace.push_back(doc.at("final_elbo").get<double>());
    }
    return fit;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("invalid parameter file: ") + e.what());
  }
}

void write_params_file(const std::string& path, const IrtFit& fit) {
  atomic_write_file(path, params_to_json(fit));
}

IrtFit read_params_file(const std::string& path) { return params_from_json(read_file(path)); }

std::vector<std::pair<std::string, double>> difficulties_from_fit(const IrtFit& fit) {
  std::vector<std::pair<std::string, double>> out;
  out.reserve(fit.item_ids.size());
  for (std::size_t i = 0; i < fit.item_ids.size(); ++i) {
    out.emplace_back(fit.item_ids[i], fit.beta[i].mean);
  }
  return out;
}

}  // namespace irtgrid

#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "irtgrid/response.hpp"

namespace irtgrid {

enum class IrtVariant { OnePL, TwoPL };

const char* to_string(IrtVariant variant);
IrtVariant variant_from_string(const std::string& name);

/// Gaussian priors on the latent scalars. Discrimination is modeled on the
/// log scale so positivity needs no constraint.
struct PriorConfig {
  double theta_mean = 0.0;
  double theta_sd = 1.0;
  double beta_mean = 0.0;
  double beta_sd = 1.0;
  double log_alpha_mean = 0.0;  // 2PL only
  double log_alpha_sd = 0.5;

  void validate() const;
};

struct FitConfig {
  IrtVariant variant = IrtVariant::OnePL;
  std::size_t epochs = 1000;
  double learning_rate = 0.1;
  std::size_t batch_size = 0;  // 0 = full batch
  std::size_t mc_samples = 4;
  double tolerance = 1e-6;  // relative ELBO improvement over the patience window
  std::size_t patience = 50;
  std::uint64_t seed = 0;
  /// Full-batch deterministic mode fixes the reduction order and reuses one
  /// set of reparameterization draws across epochs (common random numbers),
  /// which makes the objective a fixed function of the variational
  /// parameters: runs are bit-reproducible and the ELBO trace is
  /// non-decreasing. When false, draws are refreshed every epoch.
  bool deterministic = true;

  void validate() const;
};

struct PosteriorGaussian {
  double mean = 0.0;
  double sd = 1.0;

  friend bool operator==(const PosteriorGaussian&, const PosteriorGaussian&) = default;
};

/// Factorized Gaussian variational state: one (mean, sd) per latent.
/// log_alpha is empty for the 1PL model.
struct VariationalState {
  std::vector<PosteriorGaussian> theta;      // per model
  std::vector<PosteriorGaussian> beta;       // per item
  std::vector<PosteriorGaussian> log_alpha;  // per item, 2PL only
};

struct IrtFit {
  IrtVariant variant = IrtVariant::OnePL;
  std::vector<std::string> model_ids;
  std::vector<std::string> item_ids;
  std::vector<PosteriorGaussian> theta;      // per model, fit order
  std::vector<PosteriorGaussian> beta;       // per item, fit order
  std::vector<PosteriorGaussian> log_alpha;  // per item, 2PL only
  std::vector<double> elbo_trace;            // one value per completed epoch
  PriorConfig priors;
  FitConfig config;
  bool converged = false;

  double final_elbo() const;
};

/// KL(N(q.mean, q.sd^2) || N(prior_mean, prior_sd^2)), closed form.
double gaussian_kl(const PosteriorGaussian& q, double prior_mean, double prior_sd);

/// Monte-Carlo evidence lower bound: E_q[log likelihood] estimated with
/// mc_samples reparameterized draws, minus the closed-form KL to the prior.
/// Deterministic for a fixed rng_seed. The model variant follows the state
/// (2PL when log_alpha is non-empty).
double elbo(const VariationalState& state, const PriorConfig& priors,
            const ResponseMatrix& matrix, std::size_t mc_samples, std::uint64_t rng_seed);

/// Maximizes the ELBO by adaptive-moment stochastic gradient ascent over
/// the variational means and log-sds. Stops when the epoch budget is
/// exhausted or the relative ELBO improvement over the patience window
/// drops below tolerance. Throws PreconditionError for a matrix with an
/// unobserved model or item and NumericError on divergence.
IrtFit fit(const ResponseMatrix& matrix, const PriorConfig& priors, const FitConfig& config);

struct PointEstimates {
  std::vector<double> theta;  // posterior means, fit model order
  std::vector<double> beta;   // posterior means, fit item order
};

PointEstimates point_estimates(const IrtFit& fit);

/// 1-D MAP ability estimate for one held-out model under the 1PL
/// likelihood with the item difficulties held fixed. Deterministic.
/// Throws PreconditionError when no response matches the fitted bank.
double score_new_model(const std::vector<ResponseRecord>& responses,
                       const std::vector<std::pair<std::string, double>>& item_betas,
                       const PriorConfig& prior);

}  // namespace irtgrid

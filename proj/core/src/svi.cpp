#include "irtgrid/svi.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "irtgrid/errors.hpp"
#include "irtgrid/irt.hpp"
#include "irtgrid/rng.hpp"

namespace irtgrid {

const char* to_string(IrtVariant variant) {
  return variant == IrtVariant::OnePL ? "1pl" : "2pl";
}

IrtVariant variant_from_string(const std::string& name) {
  if (name == "1pl" || name == "1PL") return IrtVariant::OnePL;
  if (name == "2pl" || name == "2PL") return IrtVariant::TwoPL;
  throw ParseError("unknown IRT variant: " + name);
}

void PriorConfig::validate() const {
  if (!(theta_sd > 0.0) || !(beta_sd > 0.0) || !(log_alpha_sd > 0.0)) {
    throw PreconditionError("PriorConfig: prior sds must be positive");
  }
}

void FitConfig::validate() const {
  if (epochs < 1) throw PreconditionError("FitConfig: epochs must be >= 1");
  if (mc_samples < 1) throw PreconditionError("FitConfig: mc_samples must be >= 1");
  if (!(learning_rate > 0.0)) throw PreconditionError("FitConfig: learning_rate must be > 0");
  if (tolerance < 0.0) throw PreconditionError("FitConfig: tolerance must be >= 0");
  if (patience < 1) throw PreconditionError("FitConfig: patience must be >= 1");
}

double gaussian_kl(const PosteriorGaussian& q, double prior_mean, double prior_sd) {
  const double ratio = q.sd / prior_sd;
  const double shifted = (q.mean - prior_mean) / prior_sd;
  return -std::log(ratio) + 0.5 * (ratio * ratio + shifted * shifted - 1.0);
}

double IrtFit::final_elbo() const {
  return elbo_trace.empty() ? std::numeric_limits<double>::quiet_NaN() : elbo_trace.back();
}

namespace {

// Flat parameter vector: [theta means | theta log-sds | beta means |
// beta log-sds | log-alpha means | log-alpha log-sds]. The log-sd
// parameterization keeps positivity unconstrained.
struct Layout {
  std::size_t n_models = 0;
  std::size_t n_items = 0;
  bool two_pl = false;

  std::size_t mt() const { return 0; }
  std::size_t rt() const { return n_models; }
  std::size_t mb() const { return 2 * n_models; }
  std::size_t rb() const { return 2 * n_models + n_items; }
  std::size_t ma() const { return 2 * n_models + 2 * n_items; }
  std::size_t ra() const { return 2 * n_models + 3 * n_items; }
  std::size_t total() const { return two_pl ? 2 * (n_models + 2 * n_items) : 2 * (n_models + n_items); }
};

// Reparameterization draws, sample-major: theta[s * n_models + j].
struct EpsDraws {
  std::vector<double> theta;
  std::vector<double> beta;
  std::vector<double> alpha;
  std::size_t samples = 0;

  void fill(const Layout& lay, std::size_t n_samples, std::uint64_t seed) {
    samples = n_samples;
    theta.resize(n_samples * lay.n_models);
    beta.resize(n_samples * lay.n_items);
    alpha.resize(lay.two_pl ? n_samples * lay.n_items : 0);
    Rng rng(seed);
    for (std::size_t s = 0; s < n_samples; ++s) {
      for (std::size_t j = 0; j < lay.n_models; ++j) theta[s * lay.n_models + j] = rng.normal();
      for (std::size_t i = 0; i < lay.n_items; ++i) beta[s * lay.n_items + i] = rng.normal();
      if (lay.two_pl) {
        for (std::size_t i = 0; i < lay.n_items; ++i) alpha[s * lay.n_items + i] = rng.normal();
      }
    }
  }
};

struct SampleBuffers {
  std::vector<double> z_theta, z_beta, z_alpha;  // latent draws for one sample
  std::vector<double> s_theta, s_beta, s_alpha;  // sds, shared across samples
};

void compute_sds(const double* p, const Layout& lay, SampleBuffers& buf) {
  buf.s_theta.resize(lay.n_models);
  buf.s_beta.resize(lay.n_items);
  for (std::size_t j = 0; j < lay.n_models; ++j) buf.s_theta[j] = std::exp(p[lay.rt() + j]);
  for (std::size_t i = 0; i < lay.n_items; ++i) buf.s_beta[i] = std::exp(p[lay.rb() + i]);
  if (lay.two_pl) {
    buf.s_alpha.resize(lay.n_items);
    for (std::size_t i = 0; i < lay.n_items; ++i) buf.s_alpha[i] = std::exp(p[lay.ra() + i]);
  }
}

void compute_sample(const double* p, const Layout& lay, const EpsDraws& eps, std::size_t s,
                    SampleBuffers& buf) {
  buf.z_theta.resize(lay.n_models);
  buf.z_beta.resize(lay.n_items);
  const double* et = eps.theta.data() + s * lay.n_models;
  const double* eb = eps.beta.data() + s * lay.n_items;
  for (std::size_t j = 0; j < lay.n_models; ++j) {
    buf.z_theta[j] = p[lay.mt() + j] + buf.s_theta[j] * et[j];
  }
  for (std::size_t i = 0; i < lay.n_items; ++i) {
    buf.z_beta[i] = p[lay.mb() + i] + buf.s_beta[i] * eb[i];
  }
  if (lay.two_pl) {
    buf.z_alpha.resize(lay.n_items);
    const double* ea = eps.alpha.data() + s * lay.n_items;
    for (std::size_t i = 0; i < lay.n_items; ++i) {
      buf.z_alpha[i] = std::exp(p[lay.ma() + i] + buf.s_alpha[i] * ea[i]);
    }
  }
}

double total_kl(const double* p, const Layout& lay, const PriorConfig& priors) {
  double kl = 0.0;
  for (std::size_t j = 0; j < lay.n_models; ++j) {
    kl += gaussian_kl({p[lay.mt() + j], std::exp(p[lay.rt() + j])}, priors.theta_mean,
                      priors.theta_sd);
  }
  for (std::size_t i = 0; i < lay.n_items; ++i) {
    kl += gaussian_kl({p[lay.mb() + i], std::exp(p[lay.rb() + i])}, priors.beta_mean,
                      priors.beta_sd);
  }
  if (lay.two_pl) {
    for (std::size_t i = 0; i < lay.n_items; ++i) {
      kl += gaussian_kl({p[lay.ma() + i], std::exp(p[lay.ra() + i])}, priors.log_alpha_mean,
                        priors.log_alpha_sd);
    }
  }
  return kl;
}

/// Monte-Carlo ELBO with the given draws; summation order is fixed by
/// (sample, observation) order, so the value is bit-reproducible.
double mc_elbo(const double* p, const Layout& lay, const PriorConfig& priors,
               const ResponseMatrix& matrix, const EpsDraws& eps, SampleBuffers& buf) {
  compute_sds(p, lay, buf);
  double ll_sum = 0.0;
  for (std::size_t s = 0; s < eps.samples; ++s) {
    compute_sample(p, lay, eps, s, buf);
    double sample_ll = 0.0;
    for (const auto& obs : matrix.observations) {
      const double gap = buf.z_theta[obs.model] - buf.z_beta[obs.item];
      const double x = lay.two_pl ? buf.z_alpha[obs.item] * gap : gap;
      sample_ll += obs.correct ? log_sigmoid(x) : log_sigmoid(-x);
    }
    ll_sum += sample_ll;
  }
  return ll_sum / static_cast<double>(eps.samples) - total_kl(p, lay, priors);
}

/// Accumulates scale * d/dp of the Monte-Carlo E_q[log likelihood] over the
/// given observation slice into g.
void add_ll_gradient(const double* p, const Layout& lay, std::span<const Observation> batch,
                     const EpsDraws& eps, double scale, SampleBuffers& buf, double* g) {
  compute_sds(p, lay, buf);
  const double w = scale / static_cast<double>(eps.samples);
  for (std::size_t s = 0; s < eps.samples; ++s) {
    compute_sample(p, lay, eps, s, buf);
    const double* et = eps.theta.data() + s * lay.n_models;
    const double* eb = eps.beta.data() + s * lay.n_items;
    const double* ea = lay.two_pl ? eps.alpha.data() + s * lay.n_items : nullptr;
    for (const auto& obs : batch) {
      const std::size_t j = obs.model;
      const std::size_t i = obs.item;
      const double gap = buf.z_theta[j] - buf.z_beta[i];
      const double alpha = lay.two_pl ? buf.z_alpha[i] : 1.0;
      const double x = alpha * gap;
      const double residual = static_cast<double>(obs.correct) - sigmoid(x);
      const double d_gap = w * alpha * residual;
      g[lay.mt() + j] += d_gap;
      g[lay.rt() + j] += d_gap * et[j] * buf.s_theta[j];
      g[lay.mb() + i] -= d_gap;
      g[lay.rb() + i] -= d_gap * eb[i] * buf.s_beta[i];
      if (lay.two_pl) {
        const double d_log_alpha = w * x * residual;
        g[lay.ma() + i] += d_log_alpha;
        g[lay.ra() + i] += d_log_alpha * ea[i] * buf.s_alpha[i];
      }
    }
  }
}

void subtract_kl_gradient(const double* p, const Layout& lay, const PriorConfig& priors,
                          double* g) {
  const auto one_block = [&](std::size_t mean_off, std::size_t rho_off, std::size_t count,
                             double prior_mean, double prior_sd) {
    const double inv_var = 1.0 / (prior_sd * prior_sd);
    for (std::size_t k = 0; k < count; ++k) {
      const double sd = std::exp(p[rho_off + k]);
      g[mean_off + k] -= (p[mean_off + k] - prior_mean) * inv_var;
      g[rho_off + k] -= sd * sd * inv_var - 1.0;
    }
  };
  one_block(lay.mt(), lay.rt(), lay.n_models, priors.theta_mean, priors.theta_sd);
  one_block(lay.mb(), lay.rb(), lay.n_items, priors.beta_mean, priors.beta_sd);
  if (lay.two_pl) {
    one_block(lay.ma(), lay.ra(), lay.n_items, priors.log_alpha_mean, priors.log_alpha_sd);
  }
}

struct AdamState {
  double lr;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  std::vector<double> m, v;
  std::size_t step = 0;

  explicit AdamState(std::size_t n, double learning_rate)
      : lr(learning_rate), m(n, 0.0), v(n, 0.0) {}

  void update_moments(const std::vector<double>& g) {
    ++step;
    for (std::size_t k = 0; k < g.size(); ++k) {
      m[k] = beta1 * m[k] + (1.0 - beta1) * g[k];
      v[k] = beta2 * v[k] + (1.0 - beta2) * g[k] * g[k];
    }
  }

  // Bias-corrected ascent direction.
  void direction(std::vector<double>& d) const {
    const double c1 = 1.0 - std::pow(beta1, static_cast<double>(step));
    const double c2 = 1.0 - std::pow(beta2, static_cast<double>(step));
    for (std::size_t k = 0; k < m.size(); ++k) {
      d[k] = (m[k] / c1) / (std::sqrt(v[k] / c2) + eps);
    }
  }
};

void validate_coverage(const ResponseMatrix& matrix) {
  std::vector<std::size_t> model_obs(matrix.model_count(), 0), item_obs(matrix.item_count(), 0);
  for (const auto& obs : matrix.observations) {
    if (obs.model >= matrix.model_count() || obs.item >= matrix.item_count()) {
      throw PreconditionError("fit: observation index out of range");
    }
    ++model_obs[obs.model];
    ++item_obs[obs.item];
  }
  for (std::size_t j = 0; j < model_obs.size(); ++j) {
    if (model_obs[j] == 0) {
      throw PreconditionError("fit: model " + matrix.models[j] +
                              " has no observations (filter upstream)");
    }
  }
  for (std::size_t i = 0; i < item_obs.size(); ++i) {
    if (item_obs[i] == 0) {
      throw PreconditionError("fit: item " + matrix.items[i] +
                              " has no observations (filter upstream)");
    }
  }
}

// Seed stream tags.
constexpr std::uint64_t kEpsStream = 0x01;
constexpr std::uint64_t kShuffleStream = 0x02;
constexpr std::uint64_t kTraceStream = 0x03;

}  // namespace

double elbo(const VariationalState& state, const PriorConfig& priors,
            const ResponseMatrix& matrix, std::size_t mc_samples, std::uint64_t rng_seed) {
  priors.validate();
  if (mc_samples < 1) {
    throw PreconditionError("elbo: mc_samples must be >= 1");
  }
  Layout lay{matrix.model_count(), matrix.item_count(), !state.log_alpha.empty()};
  if (state.theta.size() != lay.n_models || state.beta.size() != lay.n_items ||
      (lay.two_pl && state.log_alpha.size() != lay.n_items)) {
    throw PreconditionError("elbo: state does not cover every model and item");
  }
  std::vector<double> p(lay.total());
  const auto pack = [&](const std::vector<PosteriorGaussian>& block, std::size_t mean_off,
                        std::size_t rho_off) {
    for (std::size_t k = 0; k < block.size(); ++k) {
      if (!(block[k].sd > 0.0)) {
        throw PreconditionError("elbo: non-positive sd in variational state");
      }
      p[mean_off + k] = block[k].mean;
      p[rho_off + k] = std::log(block[k].sd);
    }
  };
  pack(state.theta, lay.mt(), lay.rt());
  pack(state.beta, lay.mb(), lay.rb());
  if (lay.two_pl) pack(state.log_alpha, lay.ma(), lay.ra());

  EpsDraws eps;
  eps.fill(lay, mc_samples, rng_seed);
  SampleBuffers buf;
  return mc_elbo(p.data(), lay, priors, matrix, eps, buf);
}

IrtFit fit(const ResponseMatrix& matrix, const PriorConfig& priors, const FitConfig& config) {
  priors.validate();
  config.validate();
  if (matrix.observations.empty()) {
    throw PreconditionError("fit: matrix has no observations");
  }
  validate_coverage(matrix);

  Layout lay{matrix.model_count(), matrix.item_count(), config.variant == IrtVariant::TwoPL};
  const std::size_t n_obs = matrix.observations.size();
  const bool full_batch = config.batch_size == 0 || config.batch_size >= n_obs;
  // Common random numbers make the full-batch objective a fixed function of
  // the variational parameters; the monotone safeguard below then applies.
  const bool common_draws = config.deterministic && full_batch;

  std::vector<double> params(lay.total());
  for (std::size_t j = 0; j < lay.n_models; ++j) {
    params[lay.mt() + j] = priors.theta_mean;
    params[lay.rt() + j] = std::log(priors.theta_sd);
  }
  for (std::size_t i = 0; i < lay.n_items; ++i) {
    params[lay.mb() + i] = priors.beta_mean;
    params[lay.rb() + i] = std::log(priors.beta_sd);
  }
  if (lay.two_pl) {
    for (std::size_t i = 0; i < lay.n_items; ++i) {
      params[lay.ma() + i] = priors.log_alpha_mean;
      params[lay.ra() + i] = std::log(priors.log_alpha_sd);
    }
  }

  EpsDraws eps;
  SampleBuffers buf;
  AdamState adam(lay.total(), config.learning_rate);
  std::vector<double> grad(lay.total()), dir(lay.total()), candidate(lay.total());

  if (common_draws) {
    eps.fill(lay, config.mc_samples, mix_seed(config.seed, kEpsStream));
  }

  double current = 0.0;
  if (common_draws) {
    current = mc_elbo(params.data(), lay, priors, matrix, eps, buf);
  }

  IrtFit result;
  result.elbo_trace.reserve(config.epochs);
  bool converged = false;

  for (std::size_t epoch = 0; epoch < config.epochs && !converged; ++epoch) {
    if (!common_draws) {
      eps.fill(lay, config.mc_samples, mix_seed(config.seed, kEpsStream, epoch + 1));
    }

    double epoch_elbo;
    if (full_batch) {
      std::fill(grad.begin(), grad.end(), 0.0);
      add_ll_gradient(params.data(), lay, matrix.observations, eps, 1.0, buf, grad.data());
      subtract_kl_gradient(params.data(), lay, priors, grad.data());
      adam.update_moments(grad);
      adam.direction(dir);

      double lr_eff = adam.lr;
      double proposed = 0.0;
      const double slack = 1e-9 * std::max(1.0, std::abs(current));
      for (int attempt = 0;; ++attempt) {
        for (std::size_t k = 0; k < params.size(); ++k) {
          candidate[k] = params[k] + lr_eff * dir[k];
        }
        proposed = mc_elbo(candidate.data(), lay, priors, matrix, eps, buf);
        // Safeguard only applies when the objective is deterministic.
        if (!common_draws || proposed >= current - slack || attempt >= 40) {
          break;
        }
        lr_eff *= 0.5;
      }
      params.swap(candidate);
      epoch_elbo = proposed;
    } else {
      // Mini-batch SVI: the likelihood term of each batch is scaled up to
      // the full observation count; the KL term enters every step at full
      // strength (it is cheap and keeps the objective consistent).
      std::vector<std::uint32_t> order(n_obs);
      std::iota(order.begin(), order.end(), 0);
      Rng shuffle_rng(mix_seed(config.seed, kShuffleStream, epoch));
      for (std::size_t k = n_obs; k > 1; --k) {
        const std::size_t swap_with = shuffle_rng.uniform_below(k);
        std::swap(order[k - 1], order[swap_with]);
      }
      std::vector<Observation> batch;
      batch.reserve(config.batch_size);
      for (std::size_t start = 0; start < n_obs; start += config.batch_size) {
        const std::size_t stop = std::min(n_obs, start + config.batch_size);
        batch.clear();
        for (std::size_t k = start; k < stop; ++k) {
          batch.push_back(matrix.observations[order[k]]);
        }
        const double scale = static_cast<double>(n_obs) / static_cast<double>(batch.size());
        std::fill(grad.begin(), grad.end(), 0.0);
        add_ll_gradient(params.data(), lay, batch, eps, scale, buf, grad.data());
        subtract_kl_gradient(params.data(), lay, priors, grad.data());
        adam.update_moments(grad);
        adam.direction(dir);
        for (std::size_t k = 0; k < params.size(); ++k) {
          params[k] += adam.lr * dir[k];
        }
      }
      EpsDraws trace_eps;
      trace_eps.fill(lay, config.mc_samples, mix_seed(config.seed, kTraceStream, epoch));
      epoch_elbo = mc_elbo(params.data(), lay, priors, matrix, trace_eps, buf);
    }

    if (!std::isfinite(epoch_elbo)) {
      throw NumericError("fit: ELBO diverged at epoch " + std::to_string(epoch));
    }
    current = epoch_elbo;
    result.elbo_trace.push_back(epoch_elbo);

    if (result.elbo_trace.size() > config.patience) {
      const double before = result.elbo_trace[result.elbo_trace.size() - 1 - config.patience];
      const double improvement = result.elbo_trace.back() - before;
      if (improvement < config.tolerance * std::max(std::abs(result.elbo_trace.back()), 1e-12)) {
        converged = true;
      }
    }
  }

  result.variant = config.variant;
  result.model_ids = matrix.models;
  result.item_ids = matrix.items;
  result.priors = priors;
  result.config = config;
  result.converged = converged;
  result.theta.resize(lay.n_models);
  for (std::size_t j = 0; j < lay.n_models; ++j) {
    result.theta[j] = {params[lay.mt() + j], std::exp(params[lay.rt() + j])};
  }
  result.beta.resize(lay.n_items);
  for (std::size_t i = 0; i < lay.n_items; ++i) {
    result.beta[i] = {params[lay.mb() + i], std::exp(params[lay.rb() + i])};
  }
  if (lay.two_pl) {
    result.log_alpha.resize(lay.n_items);
    for (std::size_t i = 0; i < lay.n_items; ++i) {
      result.log_alpha[i] = {params[lay.ma() + i], std::exp(params[lay.ra() + i])};
    }
  }
  return result;
}

PointEstimates point_estimates(const IrtFit& fit) {
  PointEstimates est;
  est.theta.reserve(fit.theta.size());
  for (const auto& g : fit.theta) est.theta.push_back(g.mean);
  est.beta.reserve(fit.beta.size());
  for (const auto& g : fit.beta) est.beta.push_back(g.mean);
  return est;
}

double score_new_model(const std::vector<ResponseRecord>& responses,
                       const std::vector<std::pair<std::string, double>>& item_betas,
                       const PriorConfig& prior) {
  prior.validate();
  std::vector<std::pair<double, int>> matched;  // (beta, correct)
  for (const auto& rec : responses) {
    for (const auto& [id, beta] : item_betas) {
      if (id == rec.item_id) {
        matched.emplace_back(beta, rec.correct);
        break;
      }
    }
  }
  if (matched.empty()) {
    throw PreconditionError("score_new_model: no response overlaps the fitted item bank");
  }

  // The posterior is log-concave, so its derivative is strictly decreasing:
  // bracket the root, then bisect.
  const double inv_var = 1.0 / (prior.theta_sd * prior.theta_sd);
  const auto derivative = [&](double theta) {
    double g = -(theta - prior.theta_mean) * inv_var;
    for (const auto& [beta, correct] : matched) {
      g += static_cast<double>(correct) - sigmoid(theta - beta);
    }
    return g;
  };

  double lo = prior.theta_mean, hi = prior.theta_mean;
  double step = 1.0;
  while (derivative(lo) < 0.0) {
    lo -= step;
    step *= 2.0;
  }
  step = 1.0;
  while (derivative(hi) > 0.0) {
    hi += step;
    step *= 2.0;
  }
  for (int iter = 0; iter < 200 && hi - lo > 1e-13 * std::max(1.0, std::abs(hi)); ++iter) {
    const double mid = 0.5 * (lo + hi);
    if (derivative(mid) > 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace irtgrid

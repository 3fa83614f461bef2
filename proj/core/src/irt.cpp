#include "irtgrid/irt.hpp"

#include <cmath>

#include "irtgrid/errors.hpp"

namespace irtgrid {

namespace {

// log(1 + e^x) without overflow.
double softplus(double x) {
  if (x > 0) {
    return x + std::log1p(std::exp(-x));
  }
  return std::log1p(std::exp(x));
}

void check_dimensions(std::span<const double> thetas, std::span<const ItemParams> items,
                      const ResponseMatrix& matrix) {
  if (thetas.size() != matrix.model_count() || items.size() != matrix.item_count()) {
    throw PreconditionError("log_likelihood: parameter vectors do not match matrix dimensions");
  }
}

}  // namespace

void ItemParams::validate() const {
  if (!(alpha > 0.0) || !std::isfinite(alpha) || !std::isfinite(beta)) {
    throw PreconditionError("ItemParams: alpha must be positive and finite");
  }
  if (!(0.0 <= c && c < d && d <= 1.0)) {
    throw PreconditionError("ItemParams: need 0 <= c < d <= 1");
  }
}

double sigmoid(double x) {
  if (x >= 0) {
    return 1.0 / (1.0 + std::exp(-x));
  }
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double log_sigmoid(double x) { return -softplus(-x); }

double icc(double theta, const ItemParams& params) {
  if (!std::isfinite(theta)) {
    throw PreconditionError("icc: theta must be finite");
  }
  const double x = params.alpha * (theta - params.beta);
  return params.c + (params.d - params.c) * sigmoid(x);
}

double log_icc(double theta, const ItemParams& params) {
  const double x = params.alpha * (theta - params.beta);
  if (params.c == 0.0) {
    // log(d * sigmoid(x)); stays finite as x -> -inf only through the
    // logistic tail, which is exactly log d + x + O(e^x).
    return std::log(params.d) + log_sigmoid(x);
  }
  return std::log(params.c + (params.d - params.c) * sigmoid(x));
}

double log_icc_complement(double theta, const ItemParams& params) {
  const double x = params.alpha * (theta - params.beta);
  if (params.d == 1.0) {
    // 1 - P = (1 - c) * sigmoid(-x)
    return std::log1p(-params.c) + log_sigmoid(-x);
  }
  return std::log(1.0 - params.d + (params.d - params.c) * sigmoid(-x));
}

double log_likelihood(std::span<const double> thetas, std::span<const ItemParams> items,
                      const ResponseMatrix& matrix) {
  check_dimensions(thetas, items, matrix);
  double sum = 0.0;
  for (const auto& obs : matrix.observations) {
    const double theta = thetas[obs.model];
    const ItemParams& p = items[obs.item];
    sum += obs.correct ? log_icc(theta, p) : log_icc_complement(theta, p);
  }
  return sum;
}

LogLikelihoodGrad log_likelihood_grad(std::span<const double> thetas,
                                      std::span<const ItemParams> items,
                                      const ResponseMatrix& matrix) {
  check_dimensions(thetas, items, matrix);
  for (const auto& p : items) {
    if (p.c != 0.0 || p.d != 1.0) {
      throw PreconditionError("log_likelihood_grad: only logistic curves (c=0, d=1) supported");
    }
  }
  LogLikelihoodGrad g;
  g.d_theta.assign(thetas.size(), 0.0);
  g.d_beta.assign(items.size(), 0.0);
  g.d_log_alpha.assign(items.size(), 0.0);
  for (const auto& obs : matrix.observations) {
    const ItemParams& p = items[obs.item];
    const double x = p.alpha * (thetas[obs.model] - p.beta);
    // d/dx of log P(r | x) for Bernoulli-logistic is r - sigmoid(x).
    const double residual = static_cast<double>(obs.correct) - sigmoid(x);
    g.d_theta[obs.model] += p.alpha * residual;
    g.d_beta[obs.item] -= p.alpha * residual;
    g.d_log_alpha[obs.item] += x * residual;
  }
  return g;
}

}  // namespace irtgrid

#pragma once

#include <span>
#include <vector>

#include "irtgrid/response.hpp"

namespace irtgrid {

/// Item characteristic curve parameters. The 1PL (Rasch) case is exactly
/// {alpha=1, beta, c=0, d=1}.
struct ItemParams {
  double alpha = 1.0;  // discrimination, > 0
  double beta = 0.0;   // difficulty
  double c = 0.0;      // lower asymptote in [0, 1)
  double d = 1.0;      // upper asymptote in (c, 1]

  static ItemParams rasch(double beta) { return {1.0, beta, 0.0, 1.0}; }
  void validate() const;  // throws PreconditionError

  friend bool operator==(const ItemParams&, const ItemParams&) = default;
};

/// Stable logistic: never exponentiates a positive argument.
double sigmoid(double x);

/// log(sigmoid(x)) = -softplus(-x), stable on both tails.
double log_sigmoid(double x);

/// P(correct | theta) = c + (d - c) * sigmoid(alpha * (theta - beta)).
/// Strictly increasing in theta; tends to c / d at -inf / +inf.
double icc(double theta, const ItemParams& params);

/// log P and log(1 - P) in a form that stays finite on the tails whenever
/// the asymptote allows it (c > 0 resp. d < 1, or the logistic tail itself).
double log_icc(double theta, const ItemParams& params);
double log_icc_complement(double theta, const ItemParams& params);

/// Bernoulli log-likelihood of the observed entries:
///   sum over (i, j) of r_ij log P_ij + (1 - r_ij) log(1 - P_ij).
/// Unobserved cells contribute nothing. Summation follows observation
/// order, so the value is bit-reproducible for a fixed matrix.
double log_likelihood(std::span<const double> thetas, std::span<const ItemParams> items,
                      const ResponseMatrix& matrix);

struct LogLikelihoodGrad {
  std::vector<double> d_theta;      // per model
  std::vector<double> d_beta;       // per item
  std::vector<double> d_log_alpha;  // per item; zero vector for alpha == 1 items
};

/// Analytic gradient of log_likelihood for logistic curves (c = 0, d = 1).
LogLikelihoodGrad log_likelihood_grad(std::span<const double> thetas,
                                      std::span<const ItemParams> items,
                                      const ResponseMatrix& matrix);

}  // namespace irtgrid

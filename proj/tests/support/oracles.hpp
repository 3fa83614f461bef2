#pragma once

// Test-only oracles. Everything here is deliberately independent of the
// library implementation it is used to check.

#include <algorithm>
#include <cassert>
#include <cmath>
#include <cstddef>
#include <vector>

namespace oracles {

/// 1-based fractional ranks via sorted-copy bounds (different algorithm
/// from the library's grouped scan).
inline std::vector<double> rankify(const std::vector<double>& v) {
  std::vector<double> sorted = v;
  std::sort(sorted.begin(), sorted.end());
  std::vector<double> ranks(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    const auto lb = std::lower_bound(sorted.begin(), sorted.end(), v[i]);
    const auto ub = std::upper_bound(sorted.begin(), sorted.end(), v[i]);
    const double r = 1.0 + static_cast<double>(lb - sorted.begin());
    const double ties = static_cast<double>(ub - lb);
    ranks[i] = r + (ties - 1.0) * 0.5;
  }
  return ranks;
}

inline double pearson(const std::vector<double>& a, const std::vector<double>& b) {
  assert(a.size() == b.size());
  const double n = static_cast<double>(a.size());
  double mean_a = 0.0, mean_b = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    mean_a += a[i];
    mean_b += b[i];
  }
  mean_a /= n;
  mean_b /= n;
  double cov = 0.0, var_a = 0.0, var_b = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    cov += (a[i] - mean_a) * (b[i] - mean_b);
    var_a += (a[i] - mean_a) * (a[i] - mean_a);
    var_b += (b[i] - mean_b) * (b[i] - mean_b);
  }
  return cov / std::sqrt(var_a * var_b);
}

/// Pearson over fractional ranks, brute force.
inline double spearman_bruteforce(const std::vector<double>& a, const std::vector<double>& b) {
  return pearson(rankify(a), rankify(b));
}

/// No-ties shortcut 1 - 6 sum d^2 / (n (n^2 - 1)); only valid without ties.
inline double spearman_no_ties(const std::vector<double>& a, const std::vector<double>& b) {
  const auto ra = rankify(a);
  const auto rb = rankify(b);
  double sum_d2 = 0.0;
  for (std::size_t i = 0; i < ra.size(); ++i) {
    sum_d2 += (ra[i] - rb[i]) * (ra[i] - rb[i]);
  }
  const double n = static_cast<double>(ra.size());
  return 1.0 - 6.0 * sum_d2 / (n * (n * n - 1.0));
}

/// Composite Simpson rule with n (even) panels.
template <typename F>
double simpson(F f, double lo, double hi, int n = 4000) {
  if (n % 2 != 0) ++n;
  const double h = (hi - lo) / n;
  double sum = f(lo) + f(hi);
  for (int i = 1; i < n; ++i) {
    sum += f(lo + i * h) * (i % 2 == 1 ? 4.0 : 2.0);
  }
  return sum * h / 3.0;
}

/// E_{x ~ N(mu, sd^2)}[f(x)] by quadrature over +-12 sd.
template <typename F>
double gauss_expect(F f, double mu, double sd, int n = 8000) {
  const double norm = 1.0 / (sd * std::sqrt(2.0 * std::acos(-1.0)));
  auto integrand = [&](double x) {
    const double z = (x - mu) / sd;
    return f(x) * norm * std::exp(-0.5 * z * z);
  };
  return simpson(integrand, mu - 12.0 * sd, mu + 12.0 * sd, n);
}

/// Central finite difference of f at x with step h.
template <typename F>
double central_diff(F f, double x, double h = 1e-5) {
  return (f(x + h) - f(x - h)) / (2.0 * h);
}

/// Unicode scalar count by explicit lead-byte decoding (independent of the
/// library's continuation-byte counting).
inline std::size_t utf8_codepoints(const std::string& text) {
  std::size_t count = 0;
  std::size_t i = 0;
  while (i < text.size()) {
    const unsigned char lead = static_cast<unsigned char>(text[i]);
    std::size_t len = 1;
    if (lead >= 0xF0) {
      len = 4;
    } else if (lead >= 0xE0) {
      len = 3;
    } else if (lead >= 0xC0) {
      len = 2;
    }
    i += len;
    ++count;
  }
  return count;
}

}  // namespace oracles

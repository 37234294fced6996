#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <vector>

#include "alvar/model.hpp"
#include "alvar/models.hpp"
#include "alvar/rng.hpp"
#include "alvar/types.hpp"

namespace alvar::test_support {

/// Gaussian random walk observed in Gaussian noise, with a non-trivial
/// adjustment multiplier so that selection is actually tilted.
inline ModelSpec<double> tilted_walk(std::shared_ptr<const std::vector<double>> ys) {
  ModelSpec<double> m;
  m.sample_initial = [](Rng& rng) { return rng.normal(); };
  m.log_initial_weight = [ys](double x) { return -0.5 * (x - (*ys)[0]) * (x - (*ys)[0]); };
  m.sample_proposal = [](std::size_t, double x, Rng& rng) { return 0.9 * x + 0.5 * rng.normal(); };
  m.log_transition_weight = [ys](std::size_t n, double, double x) {
    const double y = (*ys)[(n + 1) % ys->size()];
    return -0.5 * (x - y) * (x - y);
  };
  m.log_adjustment = [ys](std::size_t n, double x) {
    const double y = (*ys)[(n + 1) % ys->size()];
    return -0.25 * (0.9 * x - y) * (0.9 * x - y);
  };
  return m;
}

inline std::shared_ptr<const std::vector<double>> random_observations(std::size_t n, Rng& rng) {
  auto ys = std::make_shared<std::vector<double>>(n);
  for (auto& y : *ys) y = rng.normal(0.0, 1.5);
  return ys;
}

/// N * sum over groups of the squared group sums of w_j (h_j - mean), computed
/// with a map keyed by label, independently of CentredSample.
inline double grouped_oracle(const ArrayXd& weights, const ArrayXd& h, const IndexArray& labels) {
  const double total = weights.sum();
  double mean = 0.0;
  for (Index j = 0; j < weights.size(); ++j) mean += weights[j] / total * h[j];
  std::map<Index, double> sums;
  for (Index j = 0; j < weights.size(); ++j) sums[labels[j]] += weights[j] / total * (h[j] - mean);
  double value = 0.0;
  for (const auto& [label, s] : sums) value += s * s;
  return static_cast<double>(weights.size()) * value;
}

/// Two-sample Kolmogorov-Smirnov statistic.
inline double ks_statistic(std::vector<double> a, std::vector<double> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= x) ++i;
    while (j < b.size() && b[j] <= x) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / a.size() - static_cast<double>(j) / b.size()));
  }
  return d;
}

/// Critical value of the two-sample KS statistic at level 0.001 (asymptotic).
inline double ks_critical_001(std::size_t n, std::size_t m) {
  return 1.949 * std::sqrt(static_cast<double>(n + m) / (static_cast<double>(n) * m));
}

}  // namespace alvar::test_support

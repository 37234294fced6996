#include "alvar/variance.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>
#include <string>

#include "alvar/resampling.hpp"

namespace alvar {

CentredSample::CentredSample(const ArrayXd& log_weights, const ArrayXd& h_values) {
  if (log_weights.size() != h_values.size()) {
    throw std::invalid_argument("CentredSample: weight and value arrays differ in length");
  }
  const ArrayXd w = normalised_weights(log_weights);
  const auto n = static_cast<std::size_t>(w.size());
  // shift by the first value so that a constant h centres to exact zeros
  const long double shift = n > 0 ? static_cast<long double>(h_values[0]) : 0.0L;
  long double mean = 0.0L;
  for (Index j = 0; j < w.size(); ++j) {
    mean += static_cast<long double>(w[j]) * (static_cast<long double>(h_values[j]) - shift);
  }
  mean += shift;
  estimate_ = static_cast<double>(mean);
  terms_.resize(n);
  for (Index j = 0; j < w.size(); ++j) {
    terms_[static_cast<std::size_t>(j)] =
        static_cast<long double>(w[j]) * (static_cast<long double>(h_values[j]) - mean);
  }
  sums_.assign(n, 0.0L);
  seen_.assign(n, 0);
}

CentredSample::Grouped CentredSample::grouped(const IndexArray& labels) const {
  const auto n = terms_.size();
  if (static_cast<std::size_t>(labels.size()) != n) {
    throw std::invalid_argument("label row length differs from the particle count");
  }
  for (std::size_t j = 0; j < n; ++j) {
    sums_[static_cast<std::size_t>(labels[static_cast<Index>(j)])] += terms_[j];
  }
  long double total = 0.0L;
  std::size_t distinct = 0;
  for (std::size_t j = 0; j < n; ++j) {
    const auto label = static_cast<std::size_t>(labels[static_cast<Index>(j)]);
    if (!seen_[label]) {
      seen_[label] = 1;
      ++distinct;
      total += sums_[label] * sums_[label];
    }
  }
  for (std::size_t j = 0; j < n; ++j) {
    const auto label = static_cast<std::size_t>(labels[static_cast<Index>(j)]);
    sums_[label] = 0.0L;
    seen_[label] = 0;
  }
  // One group holds every centred term, and those sum to zero exactly.
  if (distinct == 1) total = 0.0L;
  return {static_cast<double>(static_cast<long double>(n) * total), distinct};
}

VarianceEstimate lag_estimate(const CentredSample& sample, const EnochWindow& window,
                              std::size_t lag, std::size_t time) {
  const std::size_t reference = window.newest_generation();
  const std::size_t generation = reference > lag ? reference - lag : 0;
  if (!window.contains(generation)) {
    throw std::out_of_range("lag " + std::to_string(lag) + " outside the Enoch window");
  }
  const auto g = sample.grouped(window.row(generation));
  return {time, lag, g.value, generation, g.distinct};
}

VarianceEstimate cle(const CentredSample& sample, const EnochWindow& full_window,
                     std::size_t time) {
  if (full_window.oldest_generation() != 0) {
    throw std::out_of_range("CLE needs a window that still holds generation 0");
  }
  return lag_estimate(sample, full_window, full_window.newest_generation(), time);
}

VarianceEstimate cle(const CentredSample& sample, const EveTracker& eve, std::size_t time) {
  const auto g = sample.grouped(eve.labels());
  return {time, time, g.value, 0, g.distinct};
}

FixedLagEstimator::FixedLagEstimator(Index n_particles, std::size_t lag)
    : lag_(lag), window_(n_particles) {}

std::size_t argmax_largest(std::span<const double> values) {
  if (values.empty()) throw std::invalid_argument("argmax of an empty range");
  std::size_t best = 0;
  for (std::size_t k = 1; k < values.size(); ++k) {
    if (values[k] >= values[best]) best = k;
  }
  return best;
}

AlvarEstimator::AlvarEstimator(Index n_particles, std::optional<std::size_t> lag_cap)
    : lag_cap_(lag_cap), window_(n_particles) {}

VarianceEstimate AlvarEstimator::estimate(const CentredSample& sample, std::size_t time) const {
  return lag_estimate(sample, window_, lag_, time);
}

VarianceEstimate AlvarEstimator::select(const CentredSample& sample, const IndexArray& ancestors,
                                        std::size_t time) {
  std::size_t max_candidate = lag_ + 1;
  if (lag_cap_ && max_candidate > *lag_cap_) {
    max_candidate = *lag_cap_;
    ++cap_hits_;
  }
  window_.advance(ancestors, max_candidate + 1);

  candidates_.resize(max_candidate + 1);
  std::vector<VarianceEstimate> estimates(max_candidate + 1);
  for (std::size_t l = 0; l <= max_candidate; ++l) {
    estimates[l] = lag_estimate(sample, window_, l, time);
    candidates_[l] = estimates[l].value;
  }
  lag_ = argmax_largest(candidates_);
  window_.truncate(lag_ + 1);
  return estimates[lag_];
}

VarianceEstimate AlvarEstimator::update(const CentredSample& sample, const IndexArray& ancestors,
                                        std::size_t time) {
  ++resampling_count_;
  return select(sample, ancestors, time);
}

VarianceEstimate AlvarEstimator::update_adaptive(const CentredSample& sample,
                                                 const IndexArray& ancestors, bool resampled,
                                                 std::size_t time) {
  if (resampled) return update(sample, ancestors, time);
  return estimate(sample, time);
}

std::vector<bool> depletion_flags(std::span<const double> values_by_lag,
                                  const std::vector<bool>& previous) {
  if (values_by_lag.empty()) throw std::invalid_argument("depletion_flags: no estimates");
  const std::size_t n = values_by_lag.size() - 1;
  if (previous.size() != n) {
    throw std::invalid_argument("depletion_flags: previous flags must cover generations 0..n-1");
  }
  // prefix_max[l] = max of values at lags 0..l-1
  std::vector<double> prefix_max(n + 1, -std::numeric_limits<double>::infinity());
  for (std::size_t l = 1; l <= n; ++l) {
    prefix_max[l] = std::max(prefix_max[l - 1], values_by_lag[l - 1]);
  }
  std::vector<bool> flags(n + 1, false);
  bool predecessor_depleted = true;  // generation -1
  for (std::size_t m = 0; m <= n; ++m) {
    if (m == n) {
      flags[m] = false;
    } else {
      const std::size_t lag = n - m;
      const bool carried = previous[m];
      const bool overtaken = predecessor_depleted && values_by_lag[lag] < prefix_max[lag];
      flags[m] = carried || overtaken;
    }
    predecessor_depleted = flags[m];
  }
  return flags;
}

}  // namespace alvar

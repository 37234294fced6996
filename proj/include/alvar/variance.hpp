#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "alvar/genealogy.hpp"
#include "alvar/particle_filter.hpp"
#include "alvar/types.hpp"

namespace alvar {

/// Lag-based estimate of the asymptotic variance of the filter estimate.
///
/// The estimand is the CLT variance sigma_n^2(h) of sqrt(N) times the error of
/// the self-normalised filter estimate. It has no closed form in general; the
/// brute-force replicate estimator in the harness is the reference.
struct VarianceEstimate {
  std::size_t time = 0;
  std::size_t lag = 0;
  double value = 0.0;
  std::size_t reference_generation = 0;
  std::size_t distinct_ancestors = 0;
};

/// Normalised, centred contributions w_j/W * (h_j - estimate) of one cloud.
///
/// Grouped sums are accumulated in long double. The result depends only on
/// the partition induced by the labels, not on the label values: each group is
/// summed in particle order and the squares are added in order of the group's
/// first member. Two label rows with the same partition therefore give
/// bit-identical values, which keeps argmax ties exact.
class CentredSample {
 public:
  CentredSample(const ArrayXd& log_weights, const ArrayXd& h_values);

  template <typename State, typename Fn>
  static CentredSample from_cloud(const ParticleCloud<State>& cloud, Fn&& h) {
    return CentredSample(cloud.log_weights, evaluate(cloud, std::forward<Fn>(h)));
  }

  Index size() const { return static_cast<Index>(terms_.size()); }
  double estimate() const { return estimate_; }
  std::span<const long double> terms() const { return terms_; }

  struct Grouped {
    double value;
    std::size_t distinct;
  };
  /// N * sum over groups of (sum of centred terms in the group)^2.
  Grouped grouped(const IndexArray& labels) const;

 private:
  std::vector<long double> terms_;
  double estimate_ = 0.0;
  mutable std::vector<long double> sums_;
  mutable std::vector<char> seen_;
};

/// Estimate with groups given by the window row at generation r<lag>, where r
/// is the window's newest generation and r<lag> = max(r - lag, 0).
VarianceEstimate lag_estimate(const CentredSample& sample, const EnochWindow& window,
                              std::size_t lag, std::size_t time);

template <typename State, typename Fn>
VarianceEstimate lag_estimate(const ParticleCloud<State>& cloud, const EnochWindow& window,
                              std::size_t lag, Fn&& h) {
  return lag_estimate(CentredSample::from_cloud(cloud, std::forward<Fn>(h)), window, lag,
                      cloud.time);
}

/// Eve-index estimator on a window that still holds generation 0.
VarianceEstimate cle(const CentredSample& sample, const EnochWindow& full_window, std::size_t time);

/// Eve-index estimator from a persistent Eve row.
VarianceEstimate cle(const CentredSample& sample, const EveTracker& eve, std::size_t time);

/// Fixed-lag estimator with its own window of lag + 1 rows.
class FixedLagEstimator {
 public:
  FixedLagEstimator(Index n_particles, std::size_t lag);

  /// Record a selection step (call once per resampling event).
  void advance(const IndexArray& ancestors) { window_.advance(ancestors, lag_ + 1); }
  VarianceEstimate estimate(const CentredSample& sample, std::size_t time) const {
    return lag_estimate(sample, window_, lag_, time);
  }
  std::size_t lag() const { return lag_; }
  const EnochWindow& window() const { return window_; }

 private:
  std::size_t lag_;
  EnochWindow window_;
};

/// Adaptive-lag variance estimator.
///
/// Keeps the Enoch rows for generations r<lag>..r. On every selection step
/// the window is advanced, the candidates 0..lag+1 are evaluated and the new
/// lag is the largest maximiser; rows older than the chosen generation are
/// then released. An optional cap bounds the candidate range.
class AlvarEstimator {
 public:
  explicit AlvarEstimator(Index n_particles, std::optional<std::size_t> lag_cap = std::nullopt);

  /// Estimate at the current lag and window (used at time 0 and on steps
  /// without selection).
  VarianceEstimate estimate(const CentredSample& sample, std::size_t time) const;

  /// One update for a filter that resamples at every step.
  VarianceEstimate update(const CentredSample& sample, const IndexArray& ancestors,
                          std::size_t time);

  /// One update for a filter with adaptive resampling: window and lag are
  /// frozen unless the step resampled; generations count resampling events.
  VarianceEstimate update_adaptive(const CentredSample& sample, const IndexArray& ancestors,
                                   bool resampled, std::size_t time);

  std::size_t lag() const { return lag_; }
  std::size_t resampling_count() const { return resampling_count_; }
  const EnochWindow& window() const { return window_; }
  /// Candidate values (indexed by lag) from the most recent selection update.
  const std::vector<double>& candidates() const { return candidates_; }
  std::size_t cap_hits() const { return cap_hits_; }
  std::optional<std::size_t> lag_cap() const { return lag_cap_; }

 private:
  VarianceEstimate select(const CentredSample& sample, const IndexArray& ancestors,
                          std::size_t time);

  std::size_t lag_ = 0;
  std::size_t resampling_count_ = 0;
  std::optional<std::size_t> lag_cap_;
  std::size_t cap_hits_ = 0;
  EnochWindow window_;
  std::vector<double> candidates_;
};

/// Index of the largest maximiser of values (ties go to the larger index).
std::size_t argmax_largest(std::span<const double> values);

/// Depletion flags of the Enoch rows at time n, generations 0..n.
///
/// values_by_lag[l] is the lag-l estimate at time n (l = 0..n) and previous[m]
/// the flag of generation m at time n-1 (m = 0..n-1; empty at n = 0).
/// Generation n is never depleted and generation -1 always is; a generation
/// is depleted if it was at n-1, or if its predecessor is depleted and its
/// estimate is strictly below that of some smaller lag.
std::vector<bool> depletion_flags(std::span<const double> values_by_lag,
                                  const std::vector<bool>& previous);

}  // namespace alvar

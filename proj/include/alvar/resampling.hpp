#pragma once

#include <cstddef>
#include <variant>
#include <vector>

#include "alvar/rng.hpp"
#include "alvar/types.hpp"

namespace alvar {

/// Normalised weights exp(lw - max) / sum. Throws DegenerateWeights when all
/// log-weights are -inf.
ArrayXd normalised_weights(const ArrayXd& log_weights);

/// Effective sample size 1 / sum(normalised weight^2), from log-weights.
double effective_sample_size(const ArrayXd& log_weights);

/// Multinomial resampling by inverse CDF: one uniform per draw, in draw order,
/// mapped through the cumulative weight array by binary search.
IndexArray categorical_resample(const ArrayXd& weights, Index draws, Rng& rng);

/// Same as categorical_resample, with weights supplied as logs.
IndexArray categorical_resample_log(const ArrayXd& log_weights, Index draws, Rng& rng);

struct AlwaysResample {};

struct EssThreshold {
  double alpha;
};

struct FixedSchedule {
  std::vector<bool> bits;
};

/// When to perform selection in the adaptive filter.
class ResamplingPolicy {
 public:
  ResamplingPolicy() = default;
  static ResamplingPolicy always() { return ResamplingPolicy{AlwaysResample{}}; }
  static ResamplingPolicy ess_threshold(double alpha);
  static ResamplingPolicy fixed_schedule(std::vector<bool> bits);

  /// Resampling decision at time n given the current log-weights.
  bool should_resample(std::size_t n, const ArrayXd& log_weights) const;

  bool is_always() const { return std::holds_alternative<AlwaysResample>(variant_); }
  const std::variant<AlwaysResample, EssThreshold, FixedSchedule>& variant() const {
    return variant_;
  }

 private:
  explicit ResamplingPolicy(std::variant<AlwaysResample, EssThreshold, FixedSchedule> v)
      : variant_(std::move(v)) {}
  std::variant<AlwaysResample, EssThreshold, FixedSchedule> variant_{AlwaysResample{}};
};

}  // namespace alvar

#include "alvar/resampling.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace alvar {

ArrayXd normalised_weights(const ArrayXd& log_weights) {
  if (log_weights.size() == 0) throw std::invalid_argument("empty weight array");
  const double top = log_weights.maxCoeff();
  if (!std::isfinite(top)) {
    throw DegenerateWeights("weight degeneracy: all weights are zero");
  }
  ArrayXd w = (log_weights - top).exp();
  return w / w.sum();
}

double effective_sample_size(const ArrayXd& log_weights) {
  const ArrayXd w = normalised_weights(log_weights);
  return 1.0 / w.square().sum();
}

IndexArray categorical_resample(const ArrayXd& weights, Index draws, Rng& rng) {
  if (weights.size() == 0) throw std::invalid_argument("categorical_resample: no categories");
  if (draws < 0) throw std::invalid_argument("categorical_resample: negative draw count");
  if ((weights < 0.0).any() || !weights.allFinite()) {
    throw std::invalid_argument("categorical_resample: weights must be finite and nonnegative");
  }
  std::vector<double> cumulative(static_cast<std::size_t>(weights.size()));
  double running = 0.0;
  Index last_positive = -1;
  for (Index k = 0; k < weights.size(); ++k) {
    running += weights[k];
    cumulative[static_cast<std::size_t>(k)] = running;
    if (weights[k] > 0.0) last_positive = k;
  }
  if (!(running > 0.0)) {
    throw DegenerateWeights("weight degeneracy: all selection weights are zero");
  }
  IndexArray out(draws);
  for (Index i = 0; i < draws; ++i) {
    const double target = rng.uniform() * running;
    const auto it = std::upper_bound(cumulative.begin(), cumulative.end(), target);
    Index k = static_cast<Index>(it - cumulative.begin());
    // Rounding can push target onto the total; fall back to the last live category.
    if (k >= weights.size()) k = last_positive;
    out[i] = k;
  }
  return out;
}

IndexArray categorical_resample_log(const ArrayXd& log_weights, Index draws, Rng& rng) {
  return categorical_resample(normalised_weights(log_weights), draws, rng);
}

ResamplingPolicy ResamplingPolicy::ess_threshold(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw std::invalid_argument("ESS threshold alpha must lie strictly inside (0, 1)");
  }
  return ResamplingPolicy{EssThreshold{alpha}};
}

ResamplingPolicy ResamplingPolicy::fixed_schedule(std::vector<bool> bits) {
  return ResamplingPolicy{FixedSchedule{std::move(bits)}};
}

bool ResamplingPolicy::should_resample(std::size_t n, const ArrayXd& log_weights) const {
  if (const auto* ess = std::get_if<EssThreshold>(&variant_)) {
    return effective_sample_size(log_weights) <
           ess->alpha * static_cast<double>(log_weights.size());
  }
  if (const auto* schedule = std::get_if<FixedSchedule>(&variant_)) {
    if (n >= schedule->bits.size()) {
      throw std::out_of_range("resampling schedule shorter than the run (time " +
                              std::to_string(n) + ")");
    }
    return schedule->bits[n];
  }
  return true;
}

}  // namespace alvar

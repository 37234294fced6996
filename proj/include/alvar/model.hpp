#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <string>

#include "alvar/rng.hpp"
#include "alvar/types.hpp"

namespace alvar {

/// Distribution-flow model driven by an auxiliary particle filter.
///
/// All weights are exchanged in the log domain. A log-weight of -inf encodes a
/// zero weight; NaN and +inf are contract violations. The adjustment
/// multiplier must be strictly positive and finite, i.e. its log finite.
template <typename State>
struct ModelSpec {
  /// Draw from the initial proposal.
  std::function<State(Rng&)> sample_initial;
  /// Log Radon-Nikodym derivative of the initial measure w.r.t. the proposal.
  std::function<double(const State&)> log_initial_weight;
  /// Draw from the proposal kernel at time n.
  std::function<State(std::size_t, const State&, Rng&)> sample_proposal;
  /// Log Radon-Nikodym derivative of the unnormalised kernel w.r.t. the proposal at time n.
  std::function<double(std::size_t, const State&, const State&)> log_transition_weight;
  /// Log adjustment multiplier at time n. Empty means identically one.
  std::function<double(std::size_t, const State&)> log_adjustment;

  double adjustment_log(std::size_t n, const State& x) const {
    if (!log_adjustment) return 0.0;
    const double v = log_adjustment(n, x);
    if (!std::isfinite(v)) {
      throw ModelContractViolation("adjustment multiplier must be finite and positive");
    }
    return v;
  }
};

namespace detail {

inline double checked_log_weight(double v, const char* what) {
  if (std::isnan(v) || v == std::numeric_limits<double>::infinity()) {
    throw ModelContractViolation(std::string(what) + " must be finite and nonnegative");
  }
  return v;
}

inline double log_of_linear(double w, const char* what) {
  if (!(w >= 0.0) || !std::isfinite(w)) {
    throw ModelContractViolation(std::string(what) + " must be finite and nonnegative");
  }
  return std::log(w);
}

}  // namespace detail

/// Build a model from linear-domain weight functions.
template <typename State>
ModelSpec<State> make_linear_model(
    std::function<State(Rng&)> sample_initial, std::function<double(const State&)> initial_weight,
    std::function<State(std::size_t, const State&, Rng&)> sample_proposal,
    std::function<double(std::size_t, const State&, const State&)> transition_weight,
    std::function<double(std::size_t, const State&)> adjustment = {}) {
  ModelSpec<State> m;
  m.sample_initial = std::move(sample_initial);
  m.sample_proposal = std::move(sample_proposal);
  m.log_initial_weight = [w = std::move(initial_weight)](const State& x) {
    return detail::log_of_linear(w(x), "initial weight");
  };
  m.log_transition_weight = [w = std::move(transition_weight)](std::size_t n, const State& x,
                                                                const State& y) {
    return detail::log_of_linear(w(n, x, y), "transition weight");
  };
  if (adjustment) {
    m.log_adjustment = [a = std::move(adjustment)](std::size_t n, const State& x) {
      const double v = a(n, x);
      if (!(v > 0.0) || !std::isfinite(v)) {
        throw ModelContractViolation("adjustment multiplier must be finite and positive");
      }
      return std::log(v);
    };
  }
  return m;
}

}  // namespace alvar

#pragma once

#include <cstddef>
#include <limits>
#include <stdexcept>
#include <utility>
#include <vector>

#include "alvar/model.hpp"
#include "alvar/resampling.hpp"
#include "alvar/types.hpp"

namespace alvar {

/// One generation of the particle system.
///
/// Ancestor indices are zero-based; they are the identity at time 0 and after
/// a step that did not resample.
template <typename State>
struct ParticleCloud {
  std::size_t time = 0;
  std::vector<State> particles;
  ArrayXd log_weights;
  IndexArray ancestors;

  Index size() const { return static_cast<Index>(particles.size()); }

  void validate() const {
    const auto n = static_cast<Index>(particles.size());
    if (n < 1) throw std::invalid_argument("particle cloud must hold at least one particle");
    if (log_weights.size() != n || ancestors.size() != n) {
      throw std::invalid_argument("particle cloud arrays differ in length");
    }
    if ((ancestors < 0).any() || (ancestors >= n).any()) {
      throw std::invalid_argument("particle cloud holds an invalid ancestor index");
    }
  }
};

/// Draw the time-0 cloud: particles from the initial proposal, in index order.
template <typename State>
ParticleCloud<State> init_filter(const ModelSpec<State>& model, Index n_particles, Rng& rng) {
  if (n_particles < 1) throw std::invalid_argument("init_filter: N must be positive");
  ParticleCloud<State> cloud;
  cloud.particles.reserve(static_cast<std::size_t>(n_particles));
  cloud.log_weights.resize(n_particles);
  for (Index i = 0; i < n_particles; ++i) {
    cloud.particles.push_back(model.sample_initial(rng));
    cloud.log_weights[i] =
        detail::checked_log_weight(model.log_initial_weight(cloud.particles.back()),
                                   "initial weight");
  }
  if (!(cloud.log_weights > -std::numeric_limits<double>::infinity()).any()) {
    throw DegenerateWeights("degenerate initialisation: all initial weights are zero");
  }
  cloud.ancestors = identity_indices(n_particles);
  return cloud;
}

template <typename State>
double ess(const ParticleCloud<State>& cloud) {
  return effective_sample_size(cloud.log_weights);
}

template <typename State, typename Fn>
ArrayXd evaluate(const ParticleCloud<State>& cloud, Fn&& h) {
  ArrayXd values(cloud.size());
  for (Index i = 0; i < cloud.size(); ++i) values[i] = h(cloud.particles[static_cast<std::size_t>(i)]);
  return values;
}

/// Self-normalised estimate of the filter expectation of h.
template <typename State, typename Fn>
double filter_estimate(const ParticleCloud<State>& cloud, Fn&& h) {
  const ArrayXd w = normalised_weights(cloud.log_weights);
  return (w * evaluate(cloud, std::forward<Fn>(h))).sum();
}

namespace detail {

template <typename State>
ArrayXd log_adjustments(const ModelSpec<State>& model, const ParticleCloud<State>& cloud) {
  ArrayXd adj(cloud.size());
  for (Index i = 0; i < cloud.size(); ++i) {
    adj[i] = model.adjustment_log(cloud.time, cloud.particles[static_cast<std::size_t>(i)]);
  }
  return adj;
}

}  // namespace detail

/// One auxiliary particle filter iteration.
///
/// Draw order: N uniforms for the selection step (particle order), then the
/// proposal draws for particles 0..N-1 in order. The auxiliary bootstrap
/// filter in auxiliary_fk.hpp consumes its stream in the same order.
template <typename State>
ParticleCloud<State> apf_step(const ModelSpec<State>& model, const ParticleCloud<State>& cloud,
                              Rng& rng) {
  const Index n_particles = cloud.size();
  const ArrayXd adj = detail::log_adjustments(model, cloud);
  const ArrayXd selection = cloud.log_weights + adj;

  ParticleCloud<State> next;
  next.time = cloud.time + 1;
  next.ancestors = categorical_resample_log(selection, n_particles, rng);
  next.particles.reserve(static_cast<std::size_t>(n_particles));
  next.log_weights.resize(n_particles);
  for (Index i = 0; i < n_particles; ++i) {
    const Index parent = next.ancestors[i];
    const State& from = cloud.particles[static_cast<std::size_t>(parent)];
    next.particles.push_back(model.sample_proposal(cloud.time, from, rng));
    const double lw = detail::checked_log_weight(
        model.log_transition_weight(cloud.time, from, next.particles.back()), "transition weight");
    next.log_weights[i] = lw - adj[parent];
  }
  return next;
}

/// Iteration with selection only when the policy fires. Without selection the
/// ancestors are the identity, no adjustment is applied and the previous
/// weight is carried multiplicatively.
template <typename State>
std::pair<ParticleCloud<State>, bool> adaptive_apf_step(const ModelSpec<State>& model,
                                                        const ParticleCloud<State>& cloud,
                                                        const ResamplingPolicy& policy, Rng& rng) {
  const bool resample = policy.should_resample(cloud.time, cloud.log_weights);
  if (resample) return {apf_step(model, cloud, rng), true};

  const Index n_particles = cloud.size();
  ParticleCloud<State> next;
  next.time = cloud.time + 1;
  next.ancestors = identity_indices(n_particles);
  next.particles.reserve(static_cast<std::size_t>(n_particles));
  next.log_weights.resize(n_particles);
  for (Index i = 0; i < n_particles; ++i) {
    const State& from = cloud.particles[static_cast<std::size_t>(i)];
    next.particles.push_back(model.sample_proposal(cloud.time, from, rng));
    next.log_weights[i] =
        cloud.log_weights[i] +
        detail::checked_log_weight(
            model.log_transition_weight(cloud.time, from, next.particles.back()),
            "transition weight");
  }
  return {std::move(next), false};
}

}  // namespace alvar

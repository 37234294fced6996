#pragma once

#include <cstddef>

#include "alvar/model.hpp"
#include "alvar/particle_filter.hpp"

namespace alvar {

/// Point of the extended state space: (x_{n-1}, x_n). At time 0 both
/// coordinates hold x_0 and only `current` is meaningful.
template <typename State>
struct PairState {
  State previous;
  State current;
};

/// Auxiliary Feynman-Kac model on pairs under which an auxiliary particle
/// filter is a plain bootstrap filter.
///
///   potential_0(x0)         = adj_0(x0) * w_{-1}(x0)
///   potential_n(x', x)      = w_{n-1}(x', x) * adj_n(x) / adj_{n-1}(x')
///   mutation_n((x', x), .)  = (x, draw from R_n(x, .))
template <typename State>
class ExtendedModel {
 public:
  explicit ExtendedModel(ModelSpec<State> base) : base_(std::move(base)) {}

  const ModelSpec<State>& base() const { return base_; }

  PairState<State> sample_initial(Rng& rng) const {
    State x = base_.sample_initial(rng);
    return {x, x};
  }

  double log_initial_potential(const PairState<State>& x) const {
    const double lw = detail::checked_log_weight(base_.log_initial_weight(x.current),
                                                 "initial weight");
    return lw + base_.adjustment_log(0, x.current);
  }

  /// Log potential at time n >= 1.
  double log_potential(std::size_t n, const PairState<State>& x) const {
    const double lw = detail::checked_log_weight(
        base_.log_transition_weight(n - 1, x.previous, x.current), "transition weight");
    return (lw - base_.adjustment_log(n - 1, x.previous)) + base_.adjustment_log(n, x.current);
  }

  PairState<State> mutate(std::size_t n, const PairState<State>& x, Rng& rng) const {
    return {x.current, base_.sample_proposal(n, x.current, rng)};
  }

 private:
  ModelSpec<State> base_;
};

template <typename State>
ExtendedModel<State> extend(ModelSpec<State> model) {
  return ExtendedModel<State>(std::move(model));
}

template <typename State>
ParticleCloud<PairState<State>> bootstrap_init(const ExtendedModel<State>& ext, Index n_particles,
                                               Rng& rng) {
  if (n_particles < 1) throw std::invalid_argument("bootstrap_init: N must be positive");
  ParticleCloud<PairState<State>> cloud;
  cloud.particles.reserve(static_cast<std::size_t>(n_particles));
  cloud.log_weights.resize(n_particles);
  for (Index i = 0; i < n_particles; ++i) {
    cloud.particles.push_back(ext.sample_initial(rng));
    cloud.log_weights[i] = ext.log_initial_potential(cloud.particles.back());
  }
  if (!(cloud.log_weights > -std::numeric_limits<double>::infinity()).any()) {
    throw DegenerateWeights("degenerate initialisation: all initial potentials are zero");
  }
  cloud.ancestors = identity_indices(n_particles);
  return cloud;
}

/// One bootstrap iteration on the extended model. Consumes the random stream
/// exactly like apf_step: N selection uniforms, then mutations in order.
template <typename State>
ParticleCloud<PairState<State>> bootstrap_step(const ExtendedModel<State>& ext,
                                               const ParticleCloud<PairState<State>>& cloud,
                                               Rng& rng) {
  const Index n_particles = cloud.size();
  ParticleCloud<PairState<State>> next;
  next.time = cloud.time + 1;
  next.ancestors = categorical_resample_log(cloud.log_weights, n_particles, rng);
  next.particles.reserve(static_cast<std::size_t>(n_particles));
  next.log_weights.resize(n_particles);
  for (Index i = 0; i < n_particles; ++i) {
    const auto& parent = cloud.particles[static_cast<std::size_t>(next.ancestors[i])];
    next.particles.push_back(ext.mutate(cloud.time, parent, rng));
    next.log_weights[i] = ext.log_potential(next.time, next.particles.back());
  }
  return next;
}

}  // namespace alvar

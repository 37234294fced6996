#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <vector>

#include "alvar/model.hpp"
#include "alvar/rng.hpp"

namespace alvar {

/// X_{n+1} = a X_n + sigma U_{n+1},  Y_n = b exp(X_n / 2) V_n.
struct SvParams {
  double a = 0.975;
  double b = 0.641;
  double sigma = 0.165;

  void validate() const;
  double stationary_variance() const { return sigma * sigma / (1.0 - a * a); }
};

/// X_{n+1} = a X_n + sigma_u U_{n+1},  Y_n = b X_n + sigma_v V_n.
struct LgParams {
  double a = 0.98;
  double b = 1.0;
  double sigma_u = 0.2;
  double sigma_v = 1.0;

  void validate() const;
  double stationary_variance() const { return sigma_u * sigma_u / (1.0 - a * a); }
};

struct Trajectory {
  std::vector<double> states;
  std::vector<double> observations;
};

/// Simulate times 0..n_steps. Draw order per time n: the state (stationary
/// draw at n = 0, transition noise afterwards) then the observation noise.
/// Passing x0 fixes the initial state instead of drawing it.
Trajectory simulate(const SvParams& params, std::size_t n_steps, Rng& rng,
                    std::optional<double> x0 = std::nullopt);
Trajectory simulate(const LgParams& params, std::size_t n_steps, Rng& rng,
                    std::optional<double> x0 = std::nullopt);

double sv_log_emission(const SvParams& params, double x, double y);
double lg_log_emission(const LgParams& params, double x, double y);

using Observations = std::shared_ptr<const std::vector<double>>;

/// Bootstrap filter for the SSM: proposal is the prior kernel, initial
/// proposal the stationary law (so the initial weight is g_0), the weight of
/// step n -> n+1 is g_{n+1} and the adjustment multiplier is one.
ModelSpec<double> bootstrap_adapter(const SvParams& params, Observations ys);
ModelSpec<double> bootstrap_adapter(const LgParams& params, Observations ys);

/// Auxiliary filter for the linear Gaussian model: prior proposal, adjustment
/// multiplier equal to the one-step predictive density of the next
/// observation. Used to exercise non-trivial adjustment multipliers.
ModelSpec<double> predictive_adapter(const LgParams& params, Observations ys);

struct KalmanTrace {
  std::vector<double> mean;
  std::vector<double> variance;
};

/// Exact filter means and variances for the linear Gaussian model.
KalmanTrace kalman_filter(const LgParams& params, const std::vector<double>& observations,
                          double prior_mean, double prior_variance);

/// Same with the stationary prior N(0, sigma_u^2 / (1 - a^2)).
KalmanTrace kalman_filter(const LgParams& params, const std::vector<double>& observations);

}  // namespace alvar

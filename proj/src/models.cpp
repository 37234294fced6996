#include "alvar/models.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace alvar {

namespace {

constexpr double kLogTwoPi = 1.8378770664093454836;

double observation_at(const Observations& ys, std::size_t n) {
  if (n >= ys->size()) {
    throw std::out_of_range("no observation recorded for time " + std::to_string(n));
  }
  return (*ys)[n];
}

double gaussian_log_density(double y, double mean, double sd) {
  const double z = (y - mean) / sd;
  return -0.5 * kLogTwoPi - std::log(sd) - 0.5 * z * z;
}

}  // namespace

void SvParams::validate() const {
  if (!(std::abs(a) < 1.0)) throw std::invalid_argument("SV model needs |a| < 1");
  if (!(b > 0.0)) throw std::invalid_argument("SV model needs b > 0");
  if (!(sigma >= 0.0)) throw std::invalid_argument("SV model needs sigma >= 0");
}

void LgParams::validate() const {
  if (!(sigma_v > 0.0)) throw std::invalid_argument("linear Gaussian model needs sigma_v > 0");
  if (!(sigma_u >= 0.0)) throw std::invalid_argument("linear Gaussian model needs sigma_u >= 0");
}

Trajectory simulate(const SvParams& params, std::size_t n_steps, Rng& rng,
                    std::optional<double> x0) {
  if (!x0) params.validate();
  if (!(params.b > 0.0)) throw std::invalid_argument("SV model needs b > 0");
  Trajectory t;
  t.states.reserve(n_steps + 1);
  t.observations.reserve(n_steps + 1);
  double x = x0 ? *x0 : std::sqrt(params.stationary_variance()) * rng.normal();
  for (std::size_t n = 0; n <= n_steps; ++n) {
    if (n > 0) x = params.a * x + params.sigma * rng.normal();
    t.states.push_back(x);
    t.observations.push_back(params.b * std::exp(0.5 * x) * rng.normal());
  }
  return t;
}

Trajectory simulate(const LgParams& params, std::size_t n_steps, Rng& rng,
                    std::optional<double> x0) {
  params.validate();
  if (!x0 && !(std::abs(params.a) < 1.0)) {
    throw std::invalid_argument("linear Gaussian stationary start needs |a| < 1");
  }
  Trajectory t;
  t.states.reserve(n_steps + 1);
  t.observations.reserve(n_steps + 1);
  double x = x0 ? *x0 : std::sqrt(params.stationary_variance()) * rng.normal();
  for (std::size_t n = 0; n <= n_steps; ++n) {
    if (n > 0) x = params.a * x + params.sigma_u * rng.normal();
    t.states.push_back(x);
    t.observations.push_back(params.b * x + params.sigma_v * rng.normal());
  }
  return t;
}

double sv_log_emission(const SvParams& params, double x, double y) {
  const double scale2 = params.b * params.b * std::exp(x);
  return -0.5 * (kLogTwoPi + std::log(scale2)) - y * y / (2.0 * scale2);
}

double lg_log_emission(const LgParams& params, double x, double y) {
  return gaussian_log_density(y, params.b * x, params.sigma_v);
}

ModelSpec<double> bootstrap_adapter(const SvParams& params, Observations ys) {
  params.validate();
  if (!ys || ys->empty()) throw std::invalid_argument("bootstrap adapter needs observations");
  ModelSpec<double> m;
  const double sd0 = std::sqrt(params.stationary_variance());
  m.sample_initial = [sd0](Rng& rng) { return sd0 * rng.normal(); };
  m.log_initial_weight = [params, ys](const double& x) {
    return sv_log_emission(params, x, observation_at(ys, 0));
  };
  m.sample_proposal = [params](std::size_t, const double& x, Rng& rng) {
    return params.a * x + params.sigma * rng.normal();
  };
  m.log_transition_weight = [params, ys](std::size_t n, const double&, const double& x_next) {
    return sv_log_emission(params, x_next, observation_at(ys, n + 1));
  };
  return m;
}

ModelSpec<double> bootstrap_adapter(const LgParams& params, Observations ys) {
  params.validate();
  if (!(std::abs(params.a) < 1.0)) {
    throw std::invalid_argument("linear Gaussian bootstrap adapter needs |a| < 1");
  }
  if (!ys || ys->empty()) throw std::invalid_argument("bootstrap adapter needs observations");
  ModelSpec<double> m;
  const double sd0 = std::sqrt(params.stationary_variance());
  m.sample_initial = [sd0](Rng& rng) { return sd0 * rng.normal(); };
  m.log_initial_weight = [params, ys](const double& x) {
    return lg_log_emission(params, x, observation_at(ys, 0));
  };
  m.sample_proposal = [params](std::size_t, const double& x, Rng& rng) {
    return params.a * x + params.sigma_u * rng.normal();
  };
  m.log_transition_weight = [params, ys](std::size_t n, const double&, const double& x_next) {
    return lg_log_emission(params, x_next, observation_at(ys, n + 1));
  };
  return m;
}

ModelSpec<double> predictive_adapter(const LgParams& params, Observations ys) {
  ModelSpec<double> m = bootstrap_adapter(params, ys);
  const double predictive_sd =
      std::sqrt(params.b * params.b * params.sigma_u * params.sigma_u +
                params.sigma_v * params.sigma_v);
  m.log_adjustment = [params, ys, predictive_sd](std::size_t n, const double& x) {
    if (n + 1 >= ys->size()) return 0.0;
    return gaussian_log_density((*ys)[n + 1], params.b * params.a * x, predictive_sd);
  };
  return m;
}

KalmanTrace kalman_filter(const LgParams& params, const std::vector<double>& observations,
                          double prior_mean, double prior_variance) {
  params.validate();
  if (!(prior_variance >= 0.0)) throw std::invalid_argument("prior variance must be >= 0");
  KalmanTrace trace;
  trace.mean.reserve(observations.size());
  trace.variance.reserve(observations.size());
  double m = prior_mean;
  double v = prior_variance;
  const double r = params.sigma_v * params.sigma_v;
  for (std::size_t n = 0; n < observations.size(); ++n) {
    if (n > 0) {
      m = params.a * m;
      v = params.a * params.a * v + params.sigma_u * params.sigma_u;
    }
    const double s = params.b * params.b * v + r;
    const double gain = v * params.b / s;
    m = m + gain * (observations[n] - params.b * m);
    v = v * r / s;
    trace.mean.push_back(m);
    trace.variance.push_back(v);
  }
  return trace;
}

KalmanTrace kalman_filter(const LgParams& params, const std::vector<double>& observations) {
  if (!(std::abs(params.a) < 1.0)) {
    throw std::invalid_argument("stationary Kalman prior needs |a| < 1");
  }
  return kalman_filter(params, observations, 0.0, params.stationary_variance());
}

}  // namespace alvar

#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "alvar/models.hpp"
#include "alvar/resampling.hpp"

namespace alvar::harness {

enum class ModelKind { stochastic_volatility, linear_gaussian };

enum class TestFunction { identity, square };

/// Variance estimators a run can carry. `alvar` follows the resampling
/// policy: with `always` it is the plain estimator, otherwise the
/// resampling-count indexed variant.
struct EstimatorSelection {
  bool alvar = true;
  bool cle = false;
  std::vector<std::size_t> fixed_lags;
};

/// Experiment description loaded from a JSON config file.
///
/// Keys (all optional): model ("sv" | "lg"), params, observations (CSV path),
/// particles, steps, replicates, reference_replicates, estimators,
/// resampling ("always" | "ess:<alpha>" | "schedule:<path>"), test_function
/// ("id" | "square"), seed, out, checkpoint_stride, lag_cap,
/// particle_counts, burn_in, max_lag, quantile, threads.
struct ExperimentConfig {
  ModelKind model = ModelKind::stochastic_volatility;
  SvParams sv;
  LgParams lg;
  std::string observations_path;
  std::size_t particles = 1000;
  std::size_t steps = 500;
  std::size_t replicates = 100;
  std::size_t reference_replicates = 500;
  EstimatorSelection estimators;
  ResamplingPolicy policy = ResamplingPolicy::always();
  std::string policy_spec = "always";
  TestFunction test_function = TestFunction::identity;
  std::uint64_t seed = 1;
  std::string out_dir = "results";
  std::size_t checkpoint_stride = 50;
  std::optional<std::size_t> lag_cap;
  std::vector<std::size_t> particle_counts{100, 1000, 10000};
  std::size_t burn_in = 100;
  std::size_t max_lag = 60;
  double quantile = 1.959964;
  std::size_t threads = 0;

  void validate() const;
  nlohmann::json to_json() const;
};

/// Parse a config document; unknown keys and ill-typed values are errors.
ExperimentConfig parse_config(const nlohmann::json& doc);

/// Load and parse a config file; throws std::runtime_error naming the path
/// when it cannot be read.
ExperimentConfig load_config(const std::string& path);

ResamplingPolicy parse_policy(const std::string& spec);

/// Parse "alvar", "alvar_adaptive", "cle" or "fixed_lag:<lag>" entries.
EstimatorSelection parse_estimators(const std::vector<std::string>& names);

double apply_test_function(TestFunction f, double x);

}  // namespace alvar::harness

#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "alvar/harness/config.hpp"
#include "alvar/particle_filter.hpp"
#include "alvar/variance.hpp"

namespace alvar::harness {

/// One emitted time of a filter run. Unselected estimators hold NaN.
/// `resampled` says whether the cloud at time n was produced by a selection
/// step (always false at n = 0).
struct StudyRecord {
  std::size_t n = 0;
  double estimate = 0.0;
  double var_alvar = 0.0;
  std::size_t lag = 0;
  double var_cle = 0.0;
  std::vector<double> var_fixed;
  double ess = 0.0;
  bool resampled = false;
  std::size_t distinct_eve = 0;
  std::size_t distinct_alvar = 0;
  double brute_force = 0.0;
};

struct ObservationSet {
  std::vector<double> observations;
  std::vector<double> states;  // empty when loaded from a file
};

/// Observations for times 0..steps: loaded from cfg.observations_path, or
/// simulated from the master seed when no path is given.
ObservationSet prepare_observations(const ExperimentConfig& cfg);

/// Bootstrap filter for the configured model.
ModelSpec<double> make_model(const ExperimentConfig& cfg, const std::vector<double>& observations);

/// Times 0, stride, 2 stride, ... up to cfg.steps.
std::vector<std::size_t> checkpoints(const ExperimentConfig& cfg);

/// Run `task(k)` for k in [0, count) on up to `threads` workers (0 = hardware
/// concurrency). Tasks must write only to their own output slot.
void parallel_for(std::size_t count, std::size_t threads,
                  const std::function<void(std::size_t)>& task);

/// Single particle filter driven by the configured resampling policy, carrying
/// the selected variance estimators.
class FilterRunner {
 public:
  FilterRunner(const ModelSpec<double>& model, const ExperimentConfig& cfg, Index n_particles,
               EstimatorSelection estimators, Rng rng);

  void step();
  StudyRecord record() const;
  std::size_t time() const { return cloud_.time; }
  bool last_resampled() const { return resampled_; }
  const ParticleCloud<double>& cloud() const { return cloud_; }
  const CentredSample& sample() const { return *sample_; }
  const AlvarEstimator& alvar() const { return alvar_; }
  const EveTracker& eve() const { return eve_; }

 private:
  void estimate();

  const ModelSpec<double>& model_;
  const ExperimentConfig& cfg_;
  EstimatorSelection estimators_;
  Rng rng_;
  ParticleCloud<double> cloud_;
  bool resampled_ = false;
  std::optional<CentredSample> sample_;
  AlvarEstimator alvar_;
  EveTracker eve_;
  std::vector<FixedLagEstimator> fixed_;
  VarianceEstimate alvar_value_;
};

/// N times the unbiased sample variance of replicate estimates.
double scaled_sample_variance(std::span<const double> estimates, double n_particles);

struct BruteForceResult {
  std::vector<std::size_t> times;
  std::vector<double> variance;
  std::vector<double> mean;
};

/// Brute-force asymptotic variance at every checkpoint from `replicates`
/// independent filters (streams split from the master seed).
BruteForceResult brute_force_variance(const ExperimentConfig& cfg, const ModelSpec<double>& model,
                                      std::size_t replicates);

/// Single run emitting all selected estimators at every checkpoint, plus the
/// brute-force reference when cfg.reference_replicates >= 2.
std::vector<StudyRecord> run_comparison(const ExperimentConfig& cfg);

/// Mean squared deviation from the reference for every lag:
/// estimates[j][l] is replicate j's lag-l estimate.
std::vector<double> empirical_mse(const std::vector<std::vector<double>>& estimates,
                                  double reference);

/// Index of the smallest minimiser.
std::size_t argmin_smallest(std::span<const double> values);

struct MseStudyResult {
  std::vector<std::size_t> times;
  std::vector<double> reference;
  std::vector<std::vector<double>> mse;             // [checkpoint][lag]
  std::vector<std::size_t> optimal_lag;             // [checkpoint]
  std::vector<std::vector<std::size_t>> alvar_lags; // [checkpoint][replicate]
};

MseStudyResult empirical_mse_study(const ExperimentConfig& cfg);

struct LagSummary {
  double mean = 0.0;
  double median = 0.0;
  double q1 = 0.0;
  double q3 = 0.0;
  std::size_t max = 0;
};

LagSummary summarise_lags(std::vector<std::size_t> lags);

/// Linear interpolation quantile (type 7) of sorted data.
double quantile_sorted(std::span<const double> sorted, double p);

struct LinearFit {
  double slope;
  double intercept;
  double r_squared;
};

/// Ordinary least squares y ~ x; absent when x has fewer than two distinct values.
std::optional<LinearFit> least_squares_fit(std::span<const double> x, std::span<const double> y);

struct LagScalingResult {
  std::vector<std::size_t> particle_counts;
  std::vector<LagSummary> summary;               // pooled lags per N
  std::vector<std::vector<double>> run_means;    // [N][run]
  std::vector<std::vector<std::vector<std::size_t>>> lags;  // [N][run][time after burn-in]
  std::optional<LinearFit> fit;                  // run mean lag vs log10 N
};

LagScalingResult lag_scaling_study(const ExperimentConfig& cfg);

/// Whether estimate +- quantile * sqrt(variance / N) misses the truth.
bool interval_misses(double estimate, double variance, double n_particles, double truth,
                     double quantile);

struct ConfintResult {
  std::vector<double> failure_rate;  // per time 0..steps
  double overall = 0.0;
};

/// Coverage of ALVar confidence intervals against the exact Kalman mean
/// (linear Gaussian model only).
ConfintResult confint_study(const ExperimentConfig& cfg);

}  // namespace alvar::harness

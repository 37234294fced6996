#include "alvar/harness/studies.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <memory>
#include <mutex>
#include <numeric>
#include <stdexcept>
#include <thread>

#include "alvar/harness/io.hpp"
#include "alvar/models.hpp"

namespace alvar::harness {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::uint64_t lag_study_stream(std::size_t particles, std::size_t run) {
  return (static_cast<std::uint64_t>(particles) << 20) ^ static_cast<std::uint64_t>(run);
}

}  // namespace

ObservationSet prepare_observations(const ExperimentConfig& cfg) {
  ObservationSet set;
  if (!cfg.observations_path.empty()) {
    set.observations = read_column_csv(cfg.observations_path);
    if (set.observations.size() < cfg.steps + 1) {
      throw std::runtime_error("observation file " + cfg.observations_path + " holds " +
                               std::to_string(set.observations.size()) +
                               " values, need " + std::to_string(cfg.steps + 1));
    }
    return set;
  }
  Rng rng = replicate_stream(cfg.seed, StreamTag::observations, 0);
  Trajectory t = cfg.model == ModelKind::stochastic_volatility ? simulate(cfg.sv, cfg.steps, rng)
                                                               : simulate(cfg.lg, cfg.steps, rng);
  set.observations = std::move(t.observations);
  set.states = std::move(t.states);
  return set;
}

ModelSpec<double> make_model(const ExperimentConfig& cfg, const std::vector<double>& observations) {
  auto ys = std::make_shared<const std::vector<double>>(observations);
  if (cfg.model == ModelKind::stochastic_volatility) return bootstrap_adapter(cfg.sv, ys);
  return bootstrap_adapter(cfg.lg, ys);
}

std::vector<std::size_t> checkpoints(const ExperimentConfig& cfg) {
  std::vector<std::size_t> times;
  for (std::size_t n = 0; n <= cfg.steps; n += cfg.checkpoint_stride) times.push_back(n);
  return times;
}

void parallel_for(std::size_t count, std::size_t threads,
                  const std::function<void(std::size_t)>& task) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min(threads, count);
  if (threads <= 1) {
    for (std::size_t k = 0; k < count; ++k) task(k);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::jthread> workers;
  workers.reserve(threads);
  for (std::size_t t = 0; t < threads; ++t) {
    workers.emplace_back([&] {
      for (std::size_t k = next++; k < count; k = next++) {
        try {
          task(k);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  workers.clear();
  if (failure) std::rethrow_exception(failure);
}

FilterRunner::FilterRunner(const ModelSpec<double>& model, const ExperimentConfig& cfg,
                           Index n_particles, EstimatorSelection estimators, Rng rng)
    : model_(model),
      cfg_(cfg),
      estimators_(std::move(estimators)),
      rng_(std::move(rng)),
      alvar_(n_particles, cfg.lag_cap),
      eve_(n_particles) {
  cloud_ = init_filter(model_, n_particles, rng_);
  for (auto lag : estimators_.fixed_lags) fixed_.emplace_back(n_particles, lag);
  estimate();
}

void FilterRunner::estimate() {
  const TestFunction f = cfg_.test_function;
  sample_.emplace(CentredSample::from_cloud(cloud_, [f](double x) {
    return apply_test_function(f, x);
  }));
  if (!estimators_.alvar) return;
  if (cloud_.time == 0) {
    alvar_value_ = alvar_.estimate(*sample_, 0);
  } else {
    alvar_value_ = alvar_.update_adaptive(*sample_, cloud_.ancestors, resampled_, cloud_.time);
  }
}

void FilterRunner::step() {
  auto [next, resampled] = adaptive_apf_step(model_, cloud_, cfg_.policy, rng_);
  cloud_ = std::move(next);
  resampled_ = resampled;
  if (resampled_) {
    if (estimators_.cle) eve_.advance(cloud_.ancestors);
    for (auto& f : fixed_) f.advance(cloud_.ancestors);
  }
  estimate();
}

StudyRecord FilterRunner::record() const {
  StudyRecord r;
  r.n = cloud_.time;
  r.estimate = sample_->estimate();
  r.ess = ess(cloud_);
  r.resampled = resampled_;
  r.brute_force = kNaN;
  if (estimators_.alvar) {
    r.var_alvar = alvar_value_.value;
    r.lag = alvar_value_.lag;
    r.distinct_alvar = alvar_value_.distinct_ancestors;
  } else {
    r.var_alvar = kNaN;
  }
  if (estimators_.cle) {
    const auto c = cle(*sample_, eve_, cloud_.time);
    r.var_cle = c.value;
    r.distinct_eve = c.distinct_ancestors;
  } else {
    r.var_cle = kNaN;
  }
  for (const auto& f : fixed_) r.var_fixed.push_back(f.estimate(*sample_, cloud_.time).value);
  return r;
}

double scaled_sample_variance(std::span<const double> estimates, double n_particles) {
  const std::size_t k = estimates.size();
  if (k < 2) throw std::invalid_argument("brute-force variance needs at least two replicates");
  long double mean = 0.0L;
  for (double e : estimates) mean += e;
  mean /= static_cast<long double>(k);
  long double ss = 0.0L;
  for (double e : estimates) ss += (e - mean) * (e - mean);
  return static_cast<double>(n_particles * ss / static_cast<long double>(k - 1));
}

BruteForceResult brute_force_variance(const ExperimentConfig& cfg, const ModelSpec<double>& model,
                                      std::size_t replicates) {
  const auto times = checkpoints(cfg);
  std::vector<std::vector<double>> per_replicate(replicates);
  EstimatorSelection none;
  none.alvar = false;
  parallel_for(replicates, cfg.threads, [&](std::size_t k) {
    FilterRunner runner(model, cfg, static_cast<Index>(cfg.particles), none,
                        replicate_stream(cfg.seed, StreamTag::reference, k));
    auto& out = per_replicate[k];
    out.reserve(times.size());
    std::size_t next_cp = 0;
    while (true) {
      if (next_cp < times.size() && runner.time() == times[next_cp]) {
        out.push_back(runner.sample().estimate());
        ++next_cp;
      }
      if (runner.time() >= cfg.steps) break;
      runner.step();
    }
  });
  BruteForceResult result;
  result.times = times;
  std::vector<double> column(replicates);
  for (std::size_t c = 0; c < times.size(); ++c) {
    for (std::size_t k = 0; k < replicates; ++k) column[k] = per_replicate[k][c];
    result.variance.push_back(
        scaled_sample_variance(column, static_cast<double>(cfg.particles)));
    result.mean.push_back(std::accumulate(column.begin(), column.end(), 0.0) /
                          static_cast<double>(replicates));
  }
  return result;
}

std::vector<StudyRecord> run_comparison(const ExperimentConfig& cfg) {
  const ObservationSet obs = prepare_observations(cfg);
  const ModelSpec<double> model = make_model(cfg, obs.observations);
  const auto times = checkpoints(cfg);
  FilterRunner runner(model, cfg, static_cast<Index>(cfg.particles), cfg.estimators,
                      replicate_stream(cfg.seed, StreamTag::replicate, 0));
  std::vector<StudyRecord> records;
  std::size_t next_cp = 0;
  while (true) {
    if (next_cp < times.size() && runner.time() == times[next_cp]) {
      records.push_back(runner.record());
      ++next_cp;
    }
    if (runner.time() >= cfg.steps) break;
    runner.step();
  }
  if (cfg.reference_replicates >= 2) {
    const auto bf = brute_force_variance(cfg, model, cfg.reference_replicates);
    for (std::size_t c = 0; c < records.size(); ++c) records[c].brute_force = bf.variance[c];
  }
  return records;
}

std::vector<double> empirical_mse(const std::vector<std::vector<double>>& estimates,
                                  double reference) {
  if (estimates.empty()) throw std::invalid_argument("empirical_mse needs at least one replicate");
  const std::size_t lags = estimates.front().size();
  std::vector<double> mse(lags, 0.0);
  for (const auto& row : estimates) {
    if (row.size() != lags) throw std::invalid_argument("ragged estimate table");
    for (std::size_t l = 0; l < lags; ++l) {
      const double d = row[l] - reference;
      mse[l] += d * d;
    }
  }
  for (auto& v : mse) v /= static_cast<double>(estimates.size());
  return mse;
}

std::size_t argmin_smallest(std::span<const double> values) {
  if (values.empty()) throw std::invalid_argument("argmin of an empty range");
  std::size_t best = 0;
  for (std::size_t k = 1; k < values.size(); ++k) {
    if (values[k] < values[best]) best = k;
  }
  return best;
}

MseStudyResult empirical_mse_study(const ExperimentConfig& cfg) {
  const ObservationSet obs = prepare_observations(cfg);
  const ModelSpec<double> model = make_model(cfg, obs.observations);
  MseStudyResult result;
  result.times = checkpoints(cfg);
  const std::size_t n_cp = result.times.size();
  const std::size_t replicates = cfg.replicates;

  // estimates[j][c][l]
  std::vector<std::vector<std::vector<double>>> estimates(replicates);
  std::vector<std::vector<std::size_t>> lags(replicates);
  EstimatorSelection alvar_only;
  parallel_for(replicates, cfg.threads, [&](std::size_t j) {
    FilterRunner runner(model, cfg, static_cast<Index>(cfg.particles), alvar_only,
                        replicate_stream(cfg.seed, StreamTag::mse, j));
    EnochWindow bank(static_cast<Index>(cfg.particles));
    std::size_t next_cp = 0;
    while (true) {
      if (next_cp < n_cp && runner.time() == result.times[next_cp]) {
        const std::size_t width = std::min(cfg.max_lag, runner.time()) + 1;
        std::vector<double> row(width);
        for (std::size_t l = 0; l < width; ++l) {
          row[l] = lag_estimate(runner.sample(), bank, l, runner.time()).value;
        }
        estimates[j].push_back(std::move(row));
        lags[j].push_back(runner.alvar().lag());
        ++next_cp;
      }
      if (runner.time() >= cfg.steps) break;
      runner.step();
      if (runner.last_resampled()) bank.advance(runner.cloud().ancestors, cfg.max_lag + 1);
    }
  });

  const auto bf = brute_force_variance(cfg, model, cfg.reference_replicates);
  result.reference = bf.variance;
  for (std::size_t c = 0; c < n_cp; ++c) {
    std::vector<std::vector<double>> table(replicates);
    std::vector<std::size_t> chosen(replicates);
    for (std::size_t j = 0; j < replicates; ++j) {
      table[j] = estimates[j][c];
      chosen[j] = lags[j][c];
    }
    result.mse.push_back(empirical_mse(table, result.reference[c]));
    result.optimal_lag.push_back(argmin_smallest(result.mse.back()));
    result.alvar_lags.push_back(std::move(chosen));
  }
  return result;
}

double quantile_sorted(std::span<const double> sorted, double p) {
  if (sorted.empty()) throw std::invalid_argument("quantile of an empty sample");
  const double pos = p * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

LagSummary summarise_lags(std::vector<std::size_t> lags) {
  if (lags.empty()) throw std::invalid_argument("no lags to summarise");
  std::vector<double> sorted(lags.begin(), lags.end());
  std::sort(sorted.begin(), sorted.end());
  LagSummary s;
  s.mean = std::accumulate(sorted.begin(), sorted.end(), 0.0) / static_cast<double>(sorted.size());
  s.median = quantile_sorted(sorted, 0.5);
  s.q1 = quantile_sorted(sorted, 0.25);
  s.q3 = quantile_sorted(sorted, 0.75);
  s.max = static_cast<std::size_t>(sorted.back());
  return s;
}

std::optional<LinearFit> least_squares_fit(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw std::invalid_argument("least_squares_fit: length mismatch");
  if (x.size() < 2) return std::nullopt;
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (!(sxx > 0.0)) return std::nullopt;
  LinearFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  fit.r_squared = syy > 0.0 ? (sxy * sxy) / (sxx * syy) : 1.0;
  return fit;
}

LagScalingResult lag_scaling_study(const ExperimentConfig& cfg) {
  const ObservationSet obs = prepare_observations(cfg);
  const ModelSpec<double> model = make_model(cfg, obs.observations);
  if (cfg.burn_in > cfg.steps) throw std::invalid_argument("burn_in exceeds the number of steps");
  LagScalingResult result;
  result.particle_counts = cfg.particle_counts;
  const std::size_t runs = std::max<std::size_t>(cfg.replicates, 1);
  const std::size_t n_counts = cfg.particle_counts.size();
  result.lags.assign(n_counts, std::vector<std::vector<std::size_t>>(runs));

  EstimatorSelection alvar_only;
  parallel_for(n_counts * runs, cfg.threads, [&](std::size_t task) {
    const std::size_t c = task / runs;
    const std::size_t r = task % runs;
    const std::size_t particles = cfg.particle_counts[c];
    FilterRunner runner(model, cfg, static_cast<Index>(particles), alvar_only,
                        Rng::stream(cfg.seed, lag_study_stream(particles, r)));
    auto& kept = result.lags[c][r];
    kept.reserve(cfg.steps + 1 - cfg.burn_in);
    while (true) {
      if (runner.time() >= cfg.burn_in) kept.push_back(runner.alvar().lag());
      if (runner.time() >= cfg.steps) break;
      runner.step();
    }
  });

  std::vector<double> xs, ys;
  for (std::size_t c = 0; c < n_counts; ++c) {
    std::vector<std::size_t> pooled;
    std::vector<double> means;
    for (const auto& run : result.lags[c]) {
      pooled.insert(pooled.end(), run.begin(), run.end());
      const double m = std::accumulate(run.begin(), run.end(), 0.0) /
                       static_cast<double>(run.size());
      means.push_back(m);
      xs.push_back(std::log10(static_cast<double>(cfg.particle_counts[c])));
      ys.push_back(m);
    }
    result.summary.push_back(summarise_lags(std::move(pooled)));
    result.run_means.push_back(std::move(means));
  }
  result.fit = least_squares_fit(xs, ys);
  return result;
}

bool interval_misses(double estimate, double variance, double n_particles, double truth,
                     double quantile) {
  const double half_width = quantile * std::sqrt(variance / n_particles);
  return !(std::abs(estimate - truth) <= half_width);
}

ConfintResult confint_study(const ExperimentConfig& cfg) {
  if (cfg.model != ModelKind::linear_gaussian) {
    throw std::invalid_argument("confint-study needs the linear Gaussian model (Kalman oracle)");
  }
  if (cfg.test_function != TestFunction::identity) {
    throw std::invalid_argument("confint-study compares against the Kalman mean; use test_function id");
  }
  const ObservationSet obs = prepare_observations(cfg);
  const ModelSpec<double> model = make_model(cfg, obs.observations);
  const KalmanTrace truth = kalman_filter(cfg.lg, obs.observations);
  const std::size_t replicates = cfg.replicates;
  std::vector<std::vector<char>> misses(replicates);
  EstimatorSelection alvar_only;
  parallel_for(replicates, cfg.threads, [&](std::size_t j) {
    FilterRunner runner(model, cfg, static_cast<Index>(cfg.particles), alvar_only,
                        replicate_stream(cfg.seed, StreamTag::replicate, j));
    auto& out = misses[j];
    out.reserve(cfg.steps + 1);
    while (true) {
      const auto rec = runner.record();
      out.push_back(interval_misses(rec.estimate, rec.var_alvar,
                                    static_cast<double>(cfg.particles), truth.mean[rec.n],
                                    cfg.quantile));
      if (runner.time() >= cfg.steps) break;
      runner.step();
    }
  });
  ConfintResult result;
  std::size_t total = 0;
  for (std::size_t n = 0; n <= cfg.steps; ++n) {
    std::size_t count = 0;
    for (const auto& m : misses) count += static_cast<std::size_t>(m[n]);
    total += count;
    result.failure_rate.push_back(static_cast<double>(count) / static_cast<double>(replicates));
  }
  result.overall = static_cast<double>(total) /
                   static_cast<double>(replicates * (cfg.steps + 1));
  return result;
}

}  // namespace alvar::harness

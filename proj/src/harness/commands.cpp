#include "alvar/harness/commands.hpp"

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <stdexcept>

#include "alvar/harness/io.hpp"
#include "alvar/harness/studies.hpp"
#include "alvar/models.hpp"

#ifndef ALVAR_GIT_REVISION
#define ALVAR_GIT_REVISION "unknown"
#endif

namespace alvar::harness {

using nlohmann::json;

namespace {

std::string out_path(const ExperimentConfig& cfg, const std::string& name) {
  return (std::filesystem::path(cfg.out_dir) / name).string();
}

std::vector<std::string> record_header(const EstimatorSelection& est) {
  std::vector<std::string> header{"n", "estimate", "var_alvar", "lag", "var_cle"};
  for (auto l : est.fixed_lags) header.push_back("var_fixed_" + std::to_string(l));
  header.insert(header.end(), {"ess", "resampled", "brute_force"});
  return header;
}

void write_records(const std::string& path, const EstimatorSelection& est,
                   const std::vector<StudyRecord>& records) {
  CsvWriter csv(path, record_header(est));
  for (const auto& r : records) {
    csv.cell(r.n).cell(r.estimate).cell(r.var_alvar).cell(r.lag).cell(r.var_cle);
    for (double v : r.var_fixed) csv.cell(v);
    csv.cell(r.ess).cell(r.resampled).cell(r.brute_force);
    csv.end_row();
  }
}

json cmd_simulate(const ExperimentConfig& cfg) {
  const ObservationSet obs = prepare_observations(cfg);
  write_column_csv(out_path(cfg, "observations.csv"), "y", obs.observations);
  if (!obs.states.empty()) write_column_csv(out_path(cfg, "states.csv"), "x", obs.states);
  return {{"outputs", obs.states.empty() ? json{"observations.csv"}
                                         : json{"observations.csv", "states.csv"}}};
}

json cmd_filter(const ExperimentConfig& cfg) {
  const ObservationSet obs = prepare_observations(cfg);
  const ModelSpec<double> model = make_model(cfg, obs.observations);
  FilterRunner runner(model, cfg, static_cast<Index>(cfg.particles), cfg.estimators,
                      replicate_stream(cfg.seed, StreamTag::replicate, 0));
  std::vector<StudyRecord> records;
  records.reserve(cfg.steps + 1);
  while (true) {
    records.push_back(runner.record());
    if (runner.time() >= cfg.steps) break;
    runner.step();
  }
  write_records(out_path(cfg, "filter.csv"), cfg.estimators, records);
  std::size_t resamples = 0;
  for (const auto& r : records) resamples += r.resampled ? 1 : 0;
  return {{"outputs", {"filter.csv"}}, {"resampling_events", resamples}};
}

json cmd_brute_force(const ExperimentConfig& cfg) {
  const ObservationSet obs = prepare_observations(cfg);
  const ModelSpec<double> model = make_model(cfg, obs.observations);
  const auto bf = brute_force_variance(cfg, model, cfg.reference_replicates);
  CsvWriter csv(out_path(cfg, "brute_force.csv"), {"n", "mean", "brute_force"});
  for (std::size_t c = 0; c < bf.times.size(); ++c) {
    csv.cell(bf.times[c]).cell(bf.mean[c]).cell(bf.variance[c]);
    csv.end_row();
  }
  return {{"outputs", {"brute_force.csv"}}};
}

json cmd_compare(const ExperimentConfig& cfg) {
  const auto records = run_comparison(cfg);
  write_records(out_path(cfg, "compare.csv"), cfg.estimators, records);
  return {{"outputs", {"compare.csv"}}};
}

json cmd_mse_study(const ExperimentConfig& cfg) {
  const auto result = empirical_mse_study(cfg);
  {
    CsvWriter csv(out_path(cfg, "mse.csv"), {"n", "lag", "mse"});
    for (std::size_t c = 0; c < result.times.size(); ++c) {
      for (std::size_t l = 0; l < result.mse[c].size(); ++l) {
        csv.cell(result.times[c]).cell(l).cell(result.mse[c][l]);
        csv.end_row();
      }
    }
  }
  {
    CsvWriter csv(out_path(cfg, "optimal_lag.csv"),
                  {"n", "brute_force", "optimal_lag", "alvar_q1", "alvar_median", "alvar_q3"});
    for (std::size_t c = 0; c < result.times.size(); ++c) {
      const auto s = summarise_lags(result.alvar_lags[c]);
      csv.cell(result.times[c]).cell(result.reference[c]).cell(result.optimal_lag[c]);
      csv.cell(s.q1).cell(s.median).cell(s.q3);
      csv.end_row();
    }
  }
  {
    CsvWriter csv(out_path(cfg, "alvar_lags.csv"), {"n", "replicate", "lag"});
    for (std::size_t c = 0; c < result.times.size(); ++c) {
      for (std::size_t j = 0; j < result.alvar_lags[c].size(); ++j) {
        csv.cell(result.times[c]).cell(j).cell(result.alvar_lags[c][j]);
        csv.end_row();
      }
    }
  }
  std::size_t within = 0;
  for (std::size_t c = 0; c < result.times.size(); ++c) {
    const auto s = summarise_lags(result.alvar_lags[c]);
    const auto opt = static_cast<double>(result.optimal_lag[c]);
    if (opt >= s.q1 && opt <= s.q3) ++within;
  }
  return {{"outputs", {"mse.csv", "optimal_lag.csv", "alvar_lags.csv"}},
          {"optimal_within_iqr", within},
          {"checkpoints", result.times.size()}};
}

json cmd_lag_study(const ExperimentConfig& cfg) {
  const auto result = lag_scaling_study(cfg);
  {
    CsvWriter csv(out_path(cfg, "lag_summary.csv"),
                  {"particles", "mean", "median", "q1", "q3", "max"});
    for (std::size_t c = 0; c < result.particle_counts.size(); ++c) {
      const auto& s = result.summary[c];
      csv.cell(result.particle_counts[c]).cell(s.mean).cell(s.median).cell(s.q1).cell(s.q3);
      csv.cell(s.max);
      csv.end_row();
    }
  }
  {
    CsvWriter csv(out_path(cfg, "lag_runs.csv"), {"particles", "run", "mean_lag"});
    for (std::size_t c = 0; c < result.particle_counts.size(); ++c) {
      for (std::size_t r = 0; r < result.run_means[c].size(); ++r) {
        csv.cell(result.particle_counts[c]).cell(r).cell(result.run_means[c][r]);
        csv.end_row();
      }
    }
  }
  {
    CsvWriter csv(out_path(cfg, "lag_traces.csv"), {"particles", "run", "n", "lag"});
    for (std::size_t c = 0; c < result.particle_counts.size(); ++c) {
      for (std::size_t r = 0; r < result.lags[c].size(); ++r) {
        const auto& trace = result.lags[c][r];
        for (std::size_t k = 0; k < trace.size(); ++k) {
          csv.cell(result.particle_counts[c]).cell(r).cell(cfg.burn_in + k).cell(trace[k]);
          csv.end_row();
        }
      }
    }
  }
  json fit = nullptr;
  if (result.fit) {
    fit = {{"slope", result.fit->slope},
           {"intercept", result.fit->intercept},
           {"r_squared", result.fit->r_squared}};
  }
  return {{"outputs", {"lag_summary.csv", "lag_runs.csv", "lag_traces.csv"}}, {"fit", fit}};
}

json cmd_confint_study(const ExperimentConfig& cfg) {
  const auto result = confint_study(cfg);
  CsvWriter csv(out_path(cfg, "failure_rate.csv"), {"n", "failure_rate"});
  for (std::size_t n = 0; n < result.failure_rate.size(); ++n) {
    csv.cell(n).cell(result.failure_rate[n]);
    csv.end_row();
  }
  return {{"outputs", {"failure_rate.csv"}}, {"overall_failure_rate", result.overall}};
}

using Handler = json (*)(const ExperimentConfig&);

Handler find_handler(const std::string& command) {
  if (command == "simulate") return cmd_simulate;
  if (command == "filter") return cmd_filter;
  if (command == "brute-force") return cmd_brute_force;
  if (command == "compare") return cmd_compare;
  if (command == "mse-study") return cmd_mse_study;
  if (command == "lag-study") return cmd_lag_study;
  if (command == "confint-study") return cmd_confint_study;
  throw std::invalid_argument("unknown subcommand '" + command + "'");
}

}  // namespace

const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names{"simulate",  "filter",    "brute-force",
                                              "compare",   "mse-study", "lag-study",
                                              "confint-study"};
  return names;
}

const char* git_revision() { return ALVAR_GIT_REVISION; }

json run_command(const std::string& command, const ExperimentConfig& cfg) {
  const Handler handler = find_handler(command);
  ensure_directory(cfg.out_dir);
  const auto start = std::chrono::steady_clock::now();
  json summary = handler(cfg);
  const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start;

  json manifest;
  manifest["command"] = command;
  manifest["config"] = cfg.to_json();
  manifest["seed"] = cfg.seed;
  manifest["git_revision"] = git_revision();
  manifest["timings"] = {{"total_seconds", elapsed.count()}};
  manifest["summary"] = std::move(summary);
  write_json(out_path(cfg, "manifest.json"), manifest);
  return manifest;
}

}  // namespace alvar::harness

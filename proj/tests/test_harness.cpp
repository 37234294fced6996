#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include "alvar/harness/commands.hpp"
#include "alvar/harness/config.hpp"
#include "alvar/harness/io.hpp"
#include "alvar/harness/studies.hpp"

using namespace alvar;
using namespace alvar::harness;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("alvar_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int run_cli(const std::string& args, const fs::path& stderr_file) {
  const std::string cmd = std::string(ALVAR_CLI_PATH) + " " + args + " > /dev/null 2> " +
                          stderr_file.string();
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

ExperimentConfig small_config() {
  ExperimentConfig cfg;
  cfg.particles = 64;
  cfg.steps = 20;
  cfg.replicates = 4;
  cfg.reference_replicates = 6;
  cfg.checkpoint_stride = 5;
  cfg.threads = 1;
  return cfg;
}

}  // namespace

TEST(Config, Defaults) {
  const auto cfg = parse_config(nlohmann::json::object());
  EXPECT_EQ(cfg.checkpoint_stride, 50u);
  EXPECT_TRUE(cfg.policy.is_always());
  EXPECT_TRUE(cfg.estimators.alvar);
  EXPECT_DOUBLE_EQ(cfg.quantile, 1.959964);
}

TEST(Config, ParsesKeys) {
  const auto doc = nlohmann::json::parse(R"({
    "model": "lg", "params": {"a": 0.9, "sigma_v": 2.0}, "particles": 10, "steps": 7,
    "estimators": ["alvar", "cle", "fixed_lag:3"], "resampling": "ess:0.5",
    "test_function": "square", "seed": 99, "lag_cap": 4})");
  const auto cfg = parse_config(doc);
  EXPECT_EQ(cfg.model, ModelKind::linear_gaussian);
  EXPECT_DOUBLE_EQ(cfg.lg.a, 0.9);
  EXPECT_DOUBLE_EQ(cfg.lg.sigma_v, 2.0);
  EXPECT_EQ(cfg.particles, 10u);
  EXPECT_TRUE(cfg.estimators.cle);
  EXPECT_EQ(cfg.estimators.fixed_lags, std::vector<std::size_t>{3});
  EXPECT_FALSE(cfg.policy.is_always());
  EXPECT_EQ(cfg.test_function, TestFunction::square);
  EXPECT_EQ(cfg.seed, 99u);
  EXPECT_EQ(cfg.lag_cap, std::optional<std::size_t>(4));
  const auto round_trip = parse_config(cfg.to_json());
  EXPECT_EQ(round_trip.to_json(), cfg.to_json());
}

TEST(Config, Rejections) {
  using nlohmann::json;
  EXPECT_THROW(parse_config(json::parse(R"({"bogus": 1})")), std::invalid_argument);
  EXPECT_THROW(parse_config(json::parse(R"({"particles": 0})")), std::invalid_argument);
  EXPECT_THROW(parse_config(json::parse(R"({"particles": -3})")), std::invalid_argument);
  EXPECT_THROW(parse_config(json::parse(R"({"resampling": "ess:1.5"})")), std::invalid_argument);
  EXPECT_THROW(parse_config(json::parse(R"({"estimators": ["magic"]})")), std::invalid_argument);
  EXPECT_THROW(parse_config(json::parse(R"({"model": "sv", "params": {"b": -1}})")),
               std::invalid_argument);
  EXPECT_THROW(load_config("/nonexistent/alvar.json"), std::runtime_error);
}

TEST(Io, FormatDouble) {
  EXPECT_EQ(format_double(0.25), "0.25");
  EXPECT_EQ(format_double(std::numeric_limits<double>::quiet_NaN()), "nan");
  EXPECT_EQ(std::stod(format_double(0.1 + 0.2)), 0.1 + 0.2);
}

TEST(Io, ColumnRoundTrip) {
  const auto dir = scratch_dir("io");
  const std::vector<double> v{1.5, -2.25, 1e-300};
  write_column_csv((dir / "y.csv").string(), "y", v);
  EXPECT_EQ(read_column_csv((dir / "y.csv").string()), v);
  try {
    read_column_csv((dir / "missing.csv").string());
    FAIL();
  } catch (const std::exception& e) {
    EXPECT_NE(std::string(e.what()).find("missing.csv"), std::string::npos);
  }
}

TEST(Studies, ScaledSampleVariance) {
  const std::vector<double> e{1.0, 2.0, 3.0, 4.0};
  EXPECT_DOUBLE_EQ(scaled_sample_variance(e, 10.0), 10.0 * 5.0 / 3.0);
  EXPECT_THROW(scaled_sample_variance(std::vector<double>{1.0}, 10.0), std::invalid_argument);
}

TEST(Studies, BruteForceConstantFunctionIsZero) {
  auto cfg = small_config();
  cfg.model = ModelKind::linear_gaussian;
  cfg.lg.b = 0.0;  // every weight equal, so the estimate is the particle mean
  cfg.lg.sigma_u = 0.0;
  const auto obs = prepare_observations(cfg);
  const auto model = make_model(cfg, obs.observations);
  // pin the initial state so every particle path is deterministic
  auto pinned = model;
  pinned.sample_initial = [](Rng&) { return 1.0; };
  const auto bf = brute_force_variance(cfg, pinned, 5);
  for (double v : bf.variance) EXPECT_EQ(v, 0.0);
}

TEST(Studies, EmpiricalMse) {
  EXPECT_EQ(empirical_mse({{1.0, 3.0}}, 2.0), (std::vector<double>{1.0, 1.0}));
  const auto m = empirical_mse({{1.0, 5.0}, {1.0, 5.0}}, 2.0);
  EXPECT_EQ(m, (std::vector<double>{1.0, 9.0}));
  EXPECT_EQ(argmin_smallest(std::vector<double>{3.0, 1.0, 1.0}), 1u);
}

TEST(Studies, LeastSquaresFit) {
  const std::vector<double> x{2.0, 3.0, 4.0}, y{1.0, 3.0, 5.0};
  const auto fit = least_squares_fit(x, y);
  ASSERT_TRUE(fit);
  EXPECT_NEAR(fit->slope, 2.0, 1e-12);
  EXPECT_NEAR(fit->intercept, -3.0, 1e-12);
  EXPECT_NEAR(fit->r_squared, 1.0, 1e-12);
  const std::vector<double> same{2.0, 2.0};
  EXPECT_FALSE(least_squares_fit(same, std::vector<double>{1.0, 2.0}));
}

TEST(Studies, LagSummary) {
  const auto s = summarise_lags({1, 2, 3, 4});
  EXPECT_DOUBLE_EQ(s.mean, 2.5);
  EXPECT_DOUBLE_EQ(s.median, 2.5);
  EXPECT_DOUBLE_EQ(s.q1, 1.75);
  EXPECT_DOUBLE_EQ(s.q3, 3.25);
  EXPECT_EQ(s.max, 4u);
}

TEST(Studies, IntervalWidthExtremes) {
  EXPECT_FALSE(interval_misses(5.0, 1e300, 100.0, -5.0, 1.96));
  EXPECT_TRUE(interval_misses(1.0, 0.0, 100.0, 1.0 + 1e-12, 1.96));
  EXPECT_FALSE(interval_misses(1.0, 4.0, 100.0, 1.3, 1.96));
  EXPECT_TRUE(interval_misses(1.0, 4.0, 100.0, 1.5, 1.96));
}

TEST(Studies, SingleParticleCountHasNoFit) {
  auto cfg = small_config();
  cfg.particle_counts = {50};
  cfg.burn_in = 5;
  cfg.replicates = 2;
  const auto r = lag_scaling_study(cfg);
  EXPECT_FALSE(r.fit);
  ASSERT_EQ(r.summary.size(), 1u);
  EXPECT_EQ(r.lags[0][0].size(), cfg.steps + 1 - cfg.burn_in);
}

TEST(Studies, ComparisonRecords) {
  auto cfg = small_config();
  cfg.estimators.cle = true;
  cfg.estimators.fixed_lags = {0, 2};
  const auto records = run_comparison(cfg);
  ASSERT_EQ(records.size(), 5u);
  EXPECT_EQ(records.front().n, 0u);
  EXPECT_EQ(records.front().lag, 0u);
  EXPECT_FALSE(records.front().resampled);
  for (const auto& r : records) {
    ASSERT_EQ(r.var_fixed.size(), 2u);
    EXPECT_GE(r.var_alvar, 0.0);
    EXPECT_FALSE(std::isnan(r.brute_force));
    // ALVar dominates any fixed lag within its candidate range
    if (r.lag >= 2) EXPECT_GE(r.var_alvar, r.var_fixed[1]);
  }
}

TEST(Studies, FixedLagZeroIsAlvarCandidateZero) {
  auto cfg = small_config();
  cfg.estimators.fixed_lags = {0};
  const auto obs = prepare_observations(cfg);
  const auto model = make_model(cfg, obs.observations);
  FilterRunner runner(model, cfg, 64, cfg.estimators, Rng(3));
  for (int k = 0; k < 20; ++k) {
    runner.step();
    EXPECT_EQ(runner.record().var_fixed[0], runner.alvar().candidates()[0]);
  }
}

TEST(Studies, ParallelMatchesSerial) {
  auto cfg = small_config();
  const auto obs = prepare_observations(cfg);
  const auto model = make_model(cfg, obs.observations);
  cfg.threads = 1;
  const auto serial = brute_force_variance(cfg, model, 8);
  cfg.threads = 4;
  const auto parallel = brute_force_variance(cfg, model, 8);
  EXPECT_EQ(serial.variance, parallel.variance);
}

TEST(Studies, MseTableShape) {
  auto cfg = small_config();
  cfg.max_lag = 6;
  const auto r = empirical_mse_study(cfg);
  ASSERT_EQ(r.times.size(), 5u);
  EXPECT_EQ(r.mse[0].size(), 1u);
  EXPECT_EQ(r.mse.back().size(), 7u);
  EXPECT_EQ(r.alvar_lags.back().size(), cfg.replicates);
}

TEST(Studies, ConfintNeedsLinearGaussian) {
  auto cfg = small_config();
  EXPECT_THROW(confint_study(cfg), std::invalid_argument);
  cfg.model = ModelKind::linear_gaussian;
  const auto r = confint_study(cfg);
  EXPECT_EQ(r.failure_rate.size(), cfg.steps + 1);
  EXPECT_GE(r.overall, 0.0);
  EXPECT_LE(r.overall, 1.0);
}

TEST(Cli, RerunIsByteIdentical) {
  const auto dir = scratch_dir("cli_det");
  std::ofstream(dir / "sv.json") << R"({"particles": 200, "steps": 60, "reference_replicates": 10,
    "estimators": ["alvar", "cle", "fixed_lag:2"], "checkpoint_stride": 10})";
  const auto cfg = (dir / "sv.json").string();
  ASSERT_EQ(run_cli("compare --config " + cfg + " --seed 7 --out " + (dir / "a").string(),
                    dir / "err"), 0);
  ASSERT_EQ(run_cli("compare --config " + cfg + " --seed 7 --out " + (dir / "b").string(),
                    dir / "err"), 0);
  EXPECT_EQ(slurp(dir / "a" / "compare.csv"), slurp(dir / "b" / "compare.csv"));
  EXPECT_TRUE(fs::exists(dir / "a" / "manifest.json"));
  const auto manifest = nlohmann::json::parse(slurp(dir / "a" / "manifest.json"));
  EXPECT_EQ(manifest["seed"], 7);
  EXPECT_TRUE(manifest.contains("git_revision"));
}

TEST(Cli, MissingObservationFile) {
  const auto dir = scratch_dir("cli_missing");
  std::ofstream(dir / "c.json") << R"({"observations": "/no/such/obs.csv"})";
  EXPECT_NE(run_cli("filter --config " + (dir / "c.json").string() + " --out " + dir.string(),
                    dir / "err"), 0);
  const auto err = slurp(dir / "err");
  EXPECT_NE(err.find("/no/such/obs.csv"), std::string::npos);
  EXPECT_NO_THROW(static_cast<void>(nlohmann::json::parse(err)));
}

TEST(Cli, MissingConfigAndUnknownCommand) {
  const auto dir = scratch_dir("cli_errors");
  EXPECT_NE(run_cli("compare --config /no/such/config.json", dir / "err"), 0);
  EXPECT_NE(slurp(dir / "err").find("/no/such/config.json"), std::string::npos);
  EXPECT_NE(run_cli("explode", dir / "err"), 0);
  EXPECT_NE(slurp(dir / "err").find("unknown subcommand"), std::string::npos);
  std::ofstream(dir / "bad.json") << "{ not json";
  EXPECT_NE(run_cli("compare --config " + (dir / "bad.json").string(), dir / "err"), 0);
}

TEST(Cli, SimulatedObservationsFeedFilter) {
  const auto dir = scratch_dir("cli_sim");
  ASSERT_EQ(run_cli("simulate --steps 30 --out " + (dir / "sim").string(), dir / "err"), 0);
  std::ofstream(dir / "c.json") << R"({"observations": ")" +
                                       (dir / "sim" / "observations.csv").string() + R"("})";
  EXPECT_EQ(run_cli("filter --steps 30 --particles 50 --config " + (dir / "c.json").string() +
                        " --out " + (dir / "f").string(),
                    dir / "err"),
            0);
  EXPECT_TRUE(fs::exists(dir / "f" / "filter.csv"));
  EXPECT_NE(run_cli("filter --steps 31 --particles 50 --config " + (dir / "c.json").string() +
                        " --out " + (dir / "f").string(),
                    dir / "err"),
            0);
}

#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <numeric>

#include "alvar/models.hpp"
#include "alvar/particle_filter.hpp"
#include "alvar/resampling.hpp"
#include "support.hpp"

using namespace alvar;

namespace {

ArrayXd logs(std::initializer_list<double> w) {
  ArrayXd a(static_cast<Index>(w.size()));
  Index i = 0;
  for (double v : w) a[i++] = std::log(v);
  return a;
}

ModelSpec<double> unit_model() {
  ModelSpec<double> m;
  m.sample_initial = [](Rng& rng) { return rng.uniform(); };
  m.log_initial_weight = [](double) { return 0.0; };
  m.sample_proposal = [](std::size_t, double x, Rng& rng) { return x + rng.normal(); };
  m.log_transition_weight = [](std::size_t, double, double) { return 0.0; };
  return m;
}

}  // namespace

TEST(Rng, UniformIsInUnitIntervalAndReproducible) {
  Rng a(42), b(42);
  for (int k = 0; k < 1000; ++k) {
    const double u = a.uniform();
    EXPECT_GE(u, 0.0);
    EXPECT_LT(u, 1.0);
    EXPECT_EQ(u, b.uniform());
  }
}

TEST(Rng, NormalConsumesTwoWords) {
  Rng a(3), b(3);
  a.normal();
  b.next();
  b.next();
  EXPECT_EQ(a.next(), b.next());
}

TEST(Rng, StreamsDiffer) {
  EXPECT_NE(Rng::stream(1, 0).next(), Rng::stream(1, 1).next());
  EXPECT_NE(replicate_stream(1, StreamTag::replicate, 0).next(),
            replicate_stream(1, StreamTag::reference, 0).next());
  EXPECT_EQ(Rng::stream(9, 4).next(), Rng::stream(9, 4).next());
}

TEST(Ess, HandValues) {
  EXPECT_DOUBLE_EQ(effective_sample_size(logs({1, 1, 1, 1})), 4.0);
  EXPECT_DOUBLE_EQ(effective_sample_size(logs({1, 0, 0, 0})), 1.0);
  EXPECT_NEAR(effective_sample_size(logs({2, 1, 1})), 16.0 / 6.0, 1e-12);
}

TEST(Ess, ScaleInvariantInLogDomain) {
  const ArrayXd lw = logs({2, 1, 1});
  EXPECT_NEAR(effective_sample_size(lw + 700.0), effective_sample_size(lw), 1e-12);
  EXPECT_NEAR(effective_sample_size(lw - 900.0), effective_sample_size(lw), 1e-12);
}

TEST(Weights, AllZeroIsDegenerate) {
  ArrayXd lw = ArrayXd::Constant(3, -std::numeric_limits<double>::infinity());
  EXPECT_THROW(normalised_weights(lw), DegenerateWeights);
  Rng rng(1);
  EXPECT_THROW(categorical_resample(ArrayXd::Zero(3), 2, rng), DegenerateWeights);
}

TEST(CategoricalResample, PointMass) {
  Rng rng(5);
  ArrayXd w(3);
  w << 1, 0, 0;
  const IndexArray idx = categorical_resample(w, 5, rng);
  ASSERT_EQ(idx.size(), 5);
  EXPECT_TRUE((idx == 0).all());
}

TEST(CategoricalResample, SingleCategory) {
  Rng rng(5);
  const IndexArray idx = categorical_resample(ArrayXd::Ones(1), 3, rng);
  EXPECT_TRUE((idx == 0).all());
}

TEST(CategoricalResample, ChiSquareUniform) {
  Rng rng(2024);
  const Index draws = 100000;
  const IndexArray idx = categorical_resample(ArrayXd::Ones(4), draws, rng);
  std::array<double, 4> counts{};
  for (Index i = 0; i < draws; ++i) counts[static_cast<std::size_t>(idx[i])] += 1.0;
  double chi2 = 0.0;
  const double expected = draws / 4.0;
  for (double c : counts) chi2 += (c - expected) * (c - expected) / expected;
  EXPECT_LT(chi2, 16.266);  // chi-square(3) upper 0.001 quantile
}

TEST(CategoricalResample, ZeroWeightNeverDrawn) {
  Rng rng(8);
  ArrayXd w(4);
  w << 0.5, 0, 0.25, 0;
  const IndexArray idx = categorical_resample(w, 20000, rng);
  EXPECT_FALSE((idx == 1).any());
  EXPECT_FALSE((idx == 3).any());
}

TEST(CategoricalResample, RejectsNegativeWeights) {
  Rng rng(1);
  ArrayXd w(2);
  w << 1, -1;
  EXPECT_ANY_THROW(categorical_resample(w, 2, rng));
}

TEST(ResamplingPolicy, Validation) {
  EXPECT_THROW(ResamplingPolicy::ess_threshold(0.0), std::invalid_argument);
  EXPECT_THROW(ResamplingPolicy::ess_threshold(1.0), std::invalid_argument);
  const auto sched = ResamplingPolicy::fixed_schedule({true, false});
  const ArrayXd lw = ArrayXd::Zero(3);
  EXPECT_TRUE(sched.should_resample(0, lw));
  EXPECT_FALSE(sched.should_resample(1, lw));
  EXPECT_THROW(sched.should_resample(2, lw), std::out_of_range);
}

TEST(InitFilter, UnitWeights) {
  Rng rng(1);
  const auto cloud = init_filter(unit_model(), 3, rng);
  EXPECT_TRUE((cloud.log_weights == 0.0).all());
  EXPECT_EQ(cloud.ancestors[0], 0);
  EXPECT_EQ(cloud.ancestors[1], 1);
  EXPECT_EQ(cloud.ancestors[2], 2);
  EXPECT_NO_THROW(cloud.validate());
}

TEST(InitFilter, RejectsBadInput) {
  Rng rng(1);
  EXPECT_THROW(init_filter(unit_model(), 0, rng), std::invalid_argument);
  auto m = unit_model();
  m.log_initial_weight = [](double) { return -std::numeric_limits<double>::infinity(); };
  EXPECT_THROW(init_filter(m, 4, rng), DegenerateWeights);
  m.log_initial_weight = [](double) { return std::nan(""); };
  EXPECT_THROW(init_filter(m, 4, rng), ModelContractViolation);
}

TEST(InitFilter, BootstrapInitialWeightIsEmission) {
  const SvParams p;
  auto ys = std::make_shared<const std::vector<double>>(std::vector<double>{0.3, -0.1});
  const auto model = bootstrap_adapter(p, ys);
  Rng rng(4);
  const auto cloud = init_filter(model, 5, rng);
  for (Index i = 0; i < 5; ++i) {
    EXPECT_DOUBLE_EQ(cloud.log_weights[i], sv_log_emission(p, cloud.particles[i], 0.3));
  }
}

TEST(InitFilter, LinearGaussianMeanMatchesKalman) {
  const LgParams p;
  const std::vector<double> y{1.3};
  auto ys = std::make_shared<const std::vector<double>>(y);
  Rng rng(11);
  const auto cloud = init_filter(bootstrap_adapter(p, ys), 10000, rng);
  const auto truth = kalman_filter(p, y);
  const double est = filter_estimate(cloud, [](double x) { return x; });
  const ArrayXd w = normalised_weights(cloud.log_weights);
  double var = 0.0;
  for (Index i = 0; i < cloud.size(); ++i) {
    var += w[i] * w[i] * (cloud.particles[i] - est) * (cloud.particles[i] - est);
  }
  EXPECT_LT(std::abs(est - truth.mean[0]), 4.0 * std::sqrt(var));
}

TEST(FilterEstimate, ConstantAndMean) {
  ParticleCloud<double> c;
  c.particles = {1, 2, 3};
  c.log_weights = ArrayXd::Zero(3);
  c.ancestors = identity_indices(3);
  EXPECT_DOUBLE_EQ(filter_estimate(c, [](double) { return 2.5; }), 2.5);
  EXPECT_DOUBLE_EQ(filter_estimate(c, [](double x) { return x; }), 2.0);
}

TEST(ApfStep, BootstrapWeightIsNextEmission) {
  const LgParams p;
  Rng obs_rng(3);
  const auto traj = simulate(p, 5, obs_rng);
  auto ys = std::make_shared<const std::vector<double>>(traj.observations);
  const auto model = bootstrap_adapter(p, ys);
  Rng rng(9);
  auto cloud = init_filter(model, 50, rng);
  cloud = apf_step(model, cloud, rng);
  EXPECT_EQ(cloud.time, 1u);
  for (Index i = 0; i < cloud.size(); ++i) {
    EXPECT_DOUBLE_EQ(cloud.log_weights[i], lg_log_emission(p, cloud.particles[i], (*ys)[1]));
  }
}

TEST(ApfStep, SingleParticle) {
  Rng rng(1);
  auto model = unit_model();
  auto cloud = init_filter(model, 1, rng);
  for (int k = 0; k < 10; ++k) {
    cloud = apf_step(model, cloud, rng);
    EXPECT_EQ(cloud.ancestors[0], 0);
  }
}

TEST(ApfStep, RejectsNonPositiveAdjustment) {
  auto model = unit_model();
  model.log_adjustment = [](std::size_t, double) {
    return -std::numeric_limits<double>::infinity();
  };
  Rng rng(1);
  const auto cloud = init_filter(model, 3, rng);
  EXPECT_THROW(apf_step(model, cloud, rng), ModelContractViolation);
}

TEST(AdaptiveStep, AlwaysMatchesApfStep) {
  Rng orng(2);
  auto model = test_support::tilted_walk(test_support::random_observations(20, orng));
  Rng a(7), b(7);
  auto ca = init_filter(model, 64, a);
  auto cb = init_filter(model, 64, b);
  for (int k = 0; k < 15; ++k) {
    ca = apf_step(model, ca, a);
    auto [next, rs] = adaptive_apf_step(model, cb, ResamplingPolicy::always(), b);
    cb = std::move(next);
    EXPECT_TRUE(rs);
    EXPECT_TRUE((ca.ancestors == cb.ancestors).all());
    EXPECT_TRUE((ca.log_weights == cb.log_weights).all());
    EXPECT_EQ(ca.particles, cb.particles);
  }
}

TEST(AdaptiveStep, EqualWeightsSkipSelection) {
  auto model = unit_model();
  Rng rng(1);
  const auto cloud = init_filter(model, 8, rng);
  const auto [next, rs] = adaptive_apf_step(model, cloud, ResamplingPolicy::ess_threshold(0.5), rng);
  EXPECT_FALSE(rs);
  EXPECT_TRUE((next.ancestors == identity_indices(8)).all());
}

TEST(AdaptiveStep, HighThresholdResamplesUnequalWeights) {
  ParticleCloud<double> c;
  c.particles = {0, 1, 2};
  c.log_weights = logs({2, 1, 1});
  c.ancestors = identity_indices(3);
  const auto policy = ResamplingPolicy::ess_threshold(0.999999);
  EXPECT_TRUE(policy.should_resample(0, c.log_weights));
  Rng rng(1);
  EXPECT_TRUE(adaptive_apf_step(unit_model(), c, policy, rng).second);
}

TEST(AdaptiveStep, CarriesWeightsWithoutSelection) {
  auto model = unit_model();
  model.log_transition_weight = [](std::size_t, double, double x) { return -x * x; };
  ParticleCloud<double> c;
  c.particles = {0.0, 1.0};
  c.log_weights = logs({1, 1});
  c.ancestors = identity_indices(2);
  Rng rng(3);
  const auto [next, rs] =
      adaptive_apf_step(model, c, ResamplingPolicy::fixed_schedule({false}), rng);
  EXPECT_FALSE(rs);
  for (Index i = 0; i < 2; ++i) {
    EXPECT_DOUBLE_EQ(next.log_weights[i], -next.particles[i] * next.particles[i]);
  }
}

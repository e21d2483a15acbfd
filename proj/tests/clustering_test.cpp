#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "sentinel/sentinel.hpp"
#include "support.hpp"

using namespace sentinel;

namespace {

std::vector<RolloutResult> results_from(const std::vector<double>& returns) {
  std::vector<RolloutResult> out;
  for (std::size_t i = 0; i < returns.size(); ++i) {
    RolloutResult r;
    r.index = static_cast<int>(i);
    r.ret = returns[i];
    out.push_back(r);
  }
  return out;
}

double weight_sum(const GaussianMixture& g) {
  double s = 0;
  for (const auto& c : g.components) s += c.weight;
  return s;
}

}  // namespace

TEST(EmFit, PointMass) {
  const std::vector<double> r(20, -3.5);
  const auto g = em_fit(r, 1, 0);
  ASSERT_EQ(g.size(), 1u);
  EXPECT_DOUBLE_EQ(g.components[0].mean, -3.5);
  EXPECT_DOUBLE_EQ(g.components[0].variance, g.variance_floor);
  EXPECT_DOUBLE_EQ(g.variance_floor, 1e-9);
  EXPECT_DOUBLE_EQ(g.components[0].weight, 1.0);
}

TEST(EmFit, SingleComponentIsClosedForm) {
  const auto r = testing_support::normal_samples(4, 300, 2.0, 3.0);
  const double mean = std::accumulate(r.begin(), r.end(), 0.0) / static_cast<double>(r.size());
  double var = 0;
  for (double x : r) var += (x - mean) * (x - mean);
  var /= static_cast<double>(r.size());
  const auto g = em_fit(r, 1, 0);
  EXPECT_NEAR(g.components[0].mean, mean, 1e-9);
  EXPECT_NEAR(g.components[0].variance, var, 1e-9);
  EXPECT_LE(g.iterations, 2);
}

TEST(EmFit, PlantedMixture) {
  const auto r = testing_support::planted_two_mode(0);
  const auto g = em_fit(r, 2, 0);
  ASSERT_EQ(g.size(), 2u);
  EXPECT_NEAR(g.components[0].mean, -80.0, 0.5);
  EXPECT_NEAR(g.components[1].mean, 8.0, 0.5);
  EXPECT_NEAR(g.components[0].weight, 0.5, 0.05);
  EXPECT_NEAR(weight_sum(g), 1.0, 1e-9);
}

TEST(EmFit, Errors) {
  const std::vector<double> two{1.0, 2.0};
  EXPECT_THROW(em_fit(two, 3, 0), InsufficientData);
  const std::vector<double> same(10, 4.0);
  EXPECT_THROW(em_fit(same, 2, 0), DegenerateInput);
}

TEST(EmFit, LikelihoodNeverDecreases) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    auto r = testing_support::normal_samples(seed, 150, -20.0, 5.0, 0);
    const auto b = testing_support::normal_samples(seed, 100, 3.0, 1.5, 1);
    r.insert(r.end(), b.begin(), b.end());
    for (int m = 1; m <= 4; ++m) {
      EmDiagnostics diag;
      const auto g = em_fit(r, m, seed, &diag);
      EXPECT_EQ(diag.traces.size(), 5u);
      for (const auto& trace : diag.traces) {
        for (std::size_t i = 1; i < trace.size(); ++i) ASSERT_GE(trace[i] - trace[i - 1], -1e-8);
      }
      for (std::size_t j = 1; j < g.size(); ++j) EXPECT_LT(g.components[j - 1].mean, g.components[j].mean);
      for (const auto& c : g.components) EXPECT_GE(c.variance, g.variance_floor);
      EXPECT_NEAR(weight_sum(g), 1.0, 1e-9);
    }
  }
}

TEST(SelectModel, UnimodalPicksOne) {
  const auto r = testing_support::normal_samples(2024, 500, 0.0, 1.0);
  EXPECT_EQ(select_model(r, 5, 0).size(), 1u);
}

TEST(SelectModel, PlantedPicksTwo) {
  EXPECT_EQ(select_model(testing_support::planted_two_mode(0), 5, 0).size(), 2u);
}

TEST(SelectModel, SingleReward) {
  const std::vector<double> one{3.0};
  const auto g = select_model(one, 5, 0);
  EXPECT_EQ(g.size(), 1u);
  EXPECT_DOUBLE_EQ(g.components[0].mean, 3.0);
}

TEST(SelectModel, BicFormula) {
  const auto r = testing_support::planted_two_mode(1);
  const auto g = select_model(r, 5, 0);
  const double m = static_cast<double>(g.size());
  EXPECT_DOUBLE_EQ(g.bic(), -2.0 * g.log_likelihood + (3.0 * m - 1.0) * std::log(200.0));
}

TEST(AssignClusters, SingleCluster) {
  const std::vector<double> r{1.0, 2.0, 6.0};
  const auto rs = results_from(r);
  const auto cs = assign_clusters(em_fit(r, 1, 0), rs);
  ASSERT_EQ(cs.size(), 1u);
  EXPECT_DOUBLE_EQ(cs[0].frequency, 1.0);
  EXPECT_DOUBLE_EQ(cs[0].mean_reward, 3.0);
  EXPECT_EQ(cs[0].members, (std::vector<int>{0, 1, 2}));
}

TEST(AssignClusters, PlantedFrequencies) {
  const auto r = testing_support::planted_two_mode(0);
  const auto cs = assign_clusters(select_model(r, 5, 0), results_from(r));
  ASSERT_EQ(cs.size(), 2u);
  EXPECT_NEAR(cs[0].frequency, 0.5, 0.05);
  EXPECT_NEAR(cs[1].frequency, 0.5, 0.05);
  EXPECT_NEAR(cs[0].mean_reward, -80.0, 0.5);
  EXPECT_NEAR(cs[1].mean_reward, 8.0, 0.5);
}

TEST(AssignClusters, EquidistantGoesToLowerId) {
  GaussianMixture g;
  g.components = {{-1.0, 1.0, 0.5}, {1.0, 1.0, 0.5}};
  const auto cs = assign_clusters(g, results_from({0.0}));
  EXPECT_EQ(cs[0].members, (std::vector<int>{0}));
  EXPECT_TRUE(cs[1].members.empty());
  EXPECT_DOUBLE_EQ(cs[1].frequency, 0.0);
}

TEST(DetectFailureModes, Thresholds) {
  ClusterSummary c;
  c.frequency = 0.049;
  c.mean_reward = -90.0;
  EXPECT_FALSE(detect_failure_modes({c}, {})[0].flagged);
  c.frequency = 0.05;
  c.mean_reward = -40.0;
  EXPECT_TRUE(detect_failure_modes({c}, {})[0].flagged);
  c.frequency = 1.0;
  c.mean_reward = 8.0;
  EXPECT_FALSE(detect_failure_modes({c}, {})[0].flagged);
}

TEST(DetectFailureModes, StricterThresholdsFlagSubset) {
  auto rng = CounterStream::derive(5, 0);
  std::vector<ClusterSummary> cs(40);
  for (auto& c : cs) {
    c.frequency = rng.uniform() * 0.2;
    c.mean_reward = -100.0 + 110.0 * rng.uniform();
  }
  for (double p : {0.01, 0.05, 0.1}) {
    for (double r : {-20.0, -40.0, -60.0}) {
      const auto loose = detect_failure_modes(cs, {p, r});
      const auto strict = detect_failure_modes(cs, {p * 1.5, r - 10.0});
      for (std::size_t i = 0; i < cs.size(); ++i) EXPECT_TRUE(!strict[i].flagged || loose[i].flagged);
    }
  }
}

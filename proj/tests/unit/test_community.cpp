#include <gtest/gtest.h>

#include "segstitch/consensus/community.hpp"
#include "support.hpp"

namespace segstitch {
namespace {

ResolutionConfig cpm(double gamma) { return {Objective::cpm, gamma, 5.0, kDefaultEdgeMin}; }

EdgeList clique(std::uint32_t first, std::uint32_t n, double w) {
  EdgeList g;
  for (std::uint32_t i = 0; i < n; ++i)
    for (std::uint32_t j = i + 1; j < n; ++j) g.push_back({first + i, first + j, w});
  return g;
}

// Fixed graph whose CPM optima were enumerated in tests/oracles/metrics_oracle.py.
const EdgeList kOracleGraph{{0, 1, 1.0}, {0, 2, 0.8}, {1, 2, 0.9}, {3, 4, 1.0},
                            {3, 5, 0.7}, {4, 5, 0.6}, {2, 3, 0.2}};

TEST(Community, QualityOfKnownPartition) {
  const std::vector<std::int32_t> two{1, 1, 1, 2, 2, 2};
  EXPECT_NEAR(partition_quality(kOracleGraph, two, cpm(0.5)), 2.0, 1e-12);
  const std::vector<std::int32_t> one(6, 1);
  EXPECT_NEAR(partition_quality(kOracleGraph, one, cpm(0.5)), 5.2 - 0.5 * 15, 1e-12);
}

TEST(Community, BruteForceMatchesOracleOptima) {
  const std::pair<double, double> cases[] = {{0.05, 4.699999999999999}, {0.5, 2.0}, {0.95, 0.10000000000000009}};
  for (const auto& [gamma, best] : cases) {
    const auto bf = brute_force_communities(kOracleGraph, cpm(gamma));
    EXPECT_NEAR(partition_quality(kOracleGraph, bf.assignment, cpm(gamma)), best, 1e-12) << gamma;
  }
}

TEST(Community, HeuristicFindsOracleOptimum) {
  for (double gamma : {0.05, 0.5, 0.95}) {
    const auto got = detect_communities(kOracleGraph, cpm(gamma), 1);
    const auto bf = brute_force_communities(kOracleGraph, cpm(gamma));
    EXPECT_NEAR(partition_quality(kOracleGraph, got.assignment, cpm(gamma)),
                partition_quality(kOracleGraph, bf.assignment, cpm(gamma)), 1e-12);
  }
}

TEST(Community, DisconnectedCliquesSeparateForAnyGamma) {
  EdgeList g = clique(0, 4, 1.0);
  const auto second = clique(4, 5, 1.0);
  g.insert(g.end(), second.begin(), second.end());
  for (double gamma : {1e-4, 0.01, 0.5, 0.99}) {
    const auto c = detect_communities(g, cpm(gamma), 3);
    EXPECT_EQ(c.communities, 2) << gamma;
    EXPECT_EQ(c.assignment[0], 1);
    EXPECT_EQ(c.assignment[4], 2);
  }
}

TEST(Community, ModularitySplitsWeaklyJoinedCliques) {
  EdgeList g = clique(0, 5, 1.0);
  const auto second = clique(5, 5, 1.0);
  g.insert(g.end(), second.begin(), second.end());
  g.push_back({4, 5, 0.1});
  const auto c = detect_communities(g, {Objective::rb, 1.0, 5.0, kDefaultEdgeMin}, 1);
  EXPECT_EQ(c.communities, 2);
  const auto bf = brute_force_communities(g, {Objective::rb, 1.0, 5.0, kDefaultEdgeMin});
  EXPECT_EQ(c.assignment, bf.assignment);
}

TEST(Community, MoreRestartsNeverLowerQuality) {
  Rng rng(31);
  for (int t = 0; t < 60; ++t) {
    const EdgeList g = test::random_graph(8, 0.6, rng);
    ResolutionConfig one = cpm(0.1 + 0.8 * uniform01(rng));
    one.restarts = 1;
    ResolutionConfig many = one;
    many.restarts = 5;
    EXPECT_GE(partition_quality(g, detect_communities(g, many, 9).assignment, many) + 1e-12,
              partition_quality(g, detect_communities(g, one, 9).assignment, one));
  }
}

TEST(Community, RejectsZeroRestarts) {
  ResolutionConfig cfg = cpm(0.1);
  cfg.restarts = 0;
  EXPECT_THROW(detect_communities(kOracleGraph, cfg, 1), ParameterError);
}

TEST(Community, LabelsAreContiguousBySmallestNode) {
  const EdgeList g{{7, 9, 1.0}, {2, 3, 1.0}};
  const auto c = detect_communities(g, cpm(0.1), 1, 12);
  ASSERT_EQ(c.assignment.size(), 12u);
  EXPECT_EQ(c.assignment[2], 1);
  EXPECT_EQ(c.assignment[3], 1);
  EXPECT_EQ(c.assignment[7], 2);
  EXPECT_EQ(c.assignment[9], 2);
  EXPECT_EQ(c.assignment[0], 0);
  EXPECT_EQ(c.assignment[11], 0);
  const auto map = c.to_label_map(3, 4);
  EXPECT_EQ(map(0, 2), 1);
  EXPECT_EQ(map(2, 1), 2);
}

TEST(Community, DeterministicPerSeed) {
  Rng rng(4);
  const auto g = test::random_graph(60, 0.1, rng);
  EXPECT_EQ(detect_communities(g, cpm(0.3), 9).assignment, detect_communities(g, cpm(0.3), 9).assignment);
}

TEST(Community, NeverBeatsBruteForceOnRandomGraphs) {
  Rng rng(21);
  for (int rep = 0; rep < 40; ++rep) {
    const int n = static_cast<int>(uniform_int(rng, 2, 8));
    const auto g = test::random_graph(n, 0.5, rng);
    const auto cfg = cpm(0.1 + 0.8 * uniform01(rng));
    const double best = partition_quality(g, brute_force_communities(g, cfg).assignment, cfg);
    const double got = partition_quality(g, detect_communities(g, cfg, rep).assignment, cfg);
    EXPECT_LE(got, best + 1e-9);
  }
}

TEST(Community, ExactCpmCountIsMonotoneInGamma) {
  Rng rng(5);
  for (int rep = 0; rep < 20; ++rep) {
    const auto g = test::random_graph(7, 0.6, rng);
    int prev = 0;
    for (double gamma = 0.05; gamma < 1.2; gamma += 0.05) {
      const int count = brute_force_communities(g, cpm(gamma)).communities;
      EXPECT_GE(count, prev);
      prev = count;
    }
  }
}

TEST(Community, RejectsEmptyAndOversizedInputs) {
  EXPECT_THROW(detect_communities({}, cpm(0.1), 1), ParameterError);
  EXPECT_THROW(brute_force_communities(clique(0, 13, 1.0), cpm(0.1)), ParameterError);
}

}  // namespace
}  // namespace segstitch

#include <gtest/gtest.h>

#include "segstitch/consensus.hpp"
#include "segstitch/metrics.hpp"
#include "support.hpp"

namespace segstitch {
namespace {

WindowSampler crop_sampler(const MixingStack& truth, int window) {
  return [&truth, window](std::size_t w, int, const WindowPlan& plan) {
    return crop_stack(truth, plan.image_row(w), plan.image_col(w), window, window);
  };
}

ConsensusConfig small_config() {
  ConsensusConfig cfg;
  cfg.window_px = 30;
  cfg.stride_px = 10;
  cfg.n_post = 2;
  cfg.resolution = {Objective::cpm, 0.01, 3.0, kDefaultEdgeMin};
  return cfg;
}

// Three separated objects; the middle one straddles the disjoint window seam at x = 30.
const MixingStack& scene() {
  static const MixingStack pi =
      test::rect_stack(60, 60, {{4, 4, 16, 16}, {22, 24, 36, 38}, {44, 40, 56, 54}});
  return pi;
}

TEST(Consensus, NoiselessSamplesRecoverTruth) {
  const auto r = consensus_segment(60, 60, crop_sampler(scene(), 30), small_config(), 1);
  EXPECT_EQ(r.communities, 3);
  EXPECT_NEAR(adjusted_rand_index(r.labels, point_estimate(scene())), 1.0, 1e-12);
  EXPECT_GT(r.edges, 0u);
}

TEST(Consensus, ResultIndependentOfWorkerCount) {
  const PosteriorSimulator sim(scene(), 10, PosteriorNoise{0.1, 2.0, 0.1, 0.1});
  const WindowSampler sampler = [&](std::size_t w, int s, const WindowPlan& plan) {
    Rng r = make_rng(5, "sample", w * 8 + static_cast<std::size_t>(s));
    return sim.sample(plan.image_row(w), plan.image_col(w), 30, 30, r);
  };
  auto cfg = small_config();
  cfg.keep_graph = true;
  cfg.max_workers = 1;
  const auto one = consensus_segment(60, 60, sampler, cfg, 2);
  cfg.max_workers = 4;
  const auto four = consensus_segment(60, 60, sampler, cfg, 2);
  EXPECT_EQ(one.labels, four.labels);
  EXPECT_EQ(one.graph, four.graph);
}

TEST(Consensus, AllBackgroundGivesEmptyResult) {
  const MixingStack empty(0, 40, 40);
  const auto r = consensus_segment(40, 40, crop_sampler(empty, 30), small_config(), 1);
  EXPECT_EQ(r.communities, 0);
  EXPECT_EQ(r.edges, 0u);
  for (auto v : r.labels.values()) EXPECT_EQ(v, 0);
}

TEST(Consensus, OverlappingWindowsAvoidSeamSplits) {
  const LabelMap truth = point_estimate(scene());
  const auto disjoint = disjoint_point_estimate(60, 60, 30, crop_sampler(scene(), 30));
  const auto consensus = consensus_segment(60, 60, crop_sampler(scene(), 30), small_config(), 1);
  EXPECT_GT(boundary_split_count(truth, disjoint), 0);
  EXPECT_EQ(boundary_split_count(truth, consensus.labels), 0);
}

TEST(Consensus, ScoreReportsAgreementWithSamples) {
  auto cfg = small_config();
  cfg.score = true;
  const auto r = consensus_segment(60, 60, crop_sampler(scene(), 30), cfg, 1);
  EXPECT_NEAR(r.score, 1.0, 1e-9);
}

TEST(Consensus, AutomaticResolutionPicksFromGrid) {
  auto cfg = small_config();
  cfg.gamma_grid = {0.01, 0.05, 0.9};
  const auto r = consensus_segment(60, 60, crop_sampler(scene(), 30), cfg, 1);
  ASSERT_EQ(r.gamma_scores.size(), 3u);
  EXPECT_NE(std::find(cfg.gamma_grid.begin(), cfg.gamma_grid.end(), r.gamma), cfg.gamma_grid.end());
  const double best = *std::max_element(r.gamma_scores.begin(), r.gamma_scores.end());
  const auto pos = static_cast<std::size_t>(std::find(cfg.gamma_grid.begin(), cfg.gamma_grid.end(), r.gamma) -
                                            cfg.gamma_grid.begin());
  EXPECT_EQ(r.gamma_scores[pos], best);
  // Ties resolve to the smallest candidate.
  for (std::size_t i = 0; i < pos; ++i) EXPECT_LT(r.gamma_scores[i], best);
  EXPECT_EQ(r.communities, 3);
}

TEST(Consensus, AutoResolutionMatchesBestFixedGamma) {
  auto cfg = small_config();
  cfg.gamma_grid = {0.01, 0.05, 0.9};
  const auto autod = consensus_segment(60, 60, crop_sampler(scene(), 30), cfg, 4);
  cfg.gamma_grid.clear();
  cfg.resolution.gamma = autod.gamma;
  const auto fixed = consensus_segment(60, 60, crop_sampler(scene(), 30), cfg, 4);
  EXPECT_EQ(autod.labels, fixed.labels);
}

TEST(Consensus, ValidatesConfig) {
  auto cfg = small_config();
  cfg.stride_px = 40;
  EXPECT_THROW(consensus_segment(60, 60, crop_sampler(scene(), 30), cfg, 1), ParameterError);
  cfg = small_config();
  cfg.gamma_grid = {0.1};
  EXPECT_THROW(cfg.validate(), ParameterError);
}

TEST(AutoResolution, RejectsDegenerateInputs) {
  const EdgeList g{{0, 1, 1.0}};
  const std::vector<double> grid{0.1, 0.2};
  EXPECT_THROW(auto_resolution(g, {}, grid, ResolutionConfig{}, 1, 1, 2), ParameterError);
  const std::vector<SampleView> bg{{LabelMap(1, 2, 0), 0, 0}};
  EXPECT_THROW(auto_resolution(g, bg, grid, ResolutionConfig{}, 1, 1, 2), ParameterError);
}

TEST(SampleAgreement, PerfectAndClippedViews) {
  const LabelMap labels = point_estimate(scene());
  std::vector<SampleView> views{{labels, 0, 0}};
  EXPECT_NEAR(sample_agreement(labels, views), 1.0, 1e-12);
  EXPECT_EQ(sample_agreement(labels, {}), 0.0);
}

TEST(DisjointPointEstimate, LabelsUniquePerWindowInstance) {
  const auto l = disjoint_point_estimate(60, 60, 30, crop_sampler(scene(), 30));
  // The middle object is cut by both seams into four window-local pieces.
  EXPECT_EQ(count_segments(l, 1), 1 + 4 + 1);
}

}  // namespace
}  // namespace segstitch

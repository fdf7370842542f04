#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "segstitch/cli/config.hpp"

namespace segstitch::cli {
namespace {

TEST(RunConfig, DefaultsAreValid) {
  const RunConfig cfg;
  EXPECT_NO_THROW(cfg.validate());
  EXPECT_EQ(cfg.dataset.train_count, 5000);
  EXPECT_EQ(cfg.dataset.test_count, 500);
  EXPECT_EQ(cfg.proposals.alpha_train, 0.3);
  EXPECT_EQ(cfg.proposals.alpha_test, 0.5);
  EXPECT_EQ(cfg.proposals.k_max, 10);
}

TEST(RunConfig, CutoffDefaultsToQuarterOfSmallestObject) {
  RunConfig cfg;
  EXPECT_DOUBLE_EQ(cfg.cutoff_px(), 5.0);
  cfg.consensus.d_c = 3.5;
  EXPECT_DOUBLE_EQ(cfg.cutoff_px(), 3.5);
  EXPECT_DOUBLE_EQ(cfg.resolution().d_c, 3.5);
}

TEST(RunConfig, DerivedConsensusConfigCarriesSettings) {
  RunConfig cfg;
  cfg.consensus.window_px = 40;
  cfg.consensus.stride_px = 10;
  cfg.posterior.n_post = 3;
  cfg.consensus.objective = "rb";
  const auto c = cfg.consensus_config();
  EXPECT_EQ(c.window_px, 40);
  EXPECT_EQ(c.stride_px, 10);
  EXPECT_EQ(c.n_post, 3);
  EXPECT_EQ(c.resolution.objective, Objective::rb);
}

TEST(RunConfig, JsonRoundTrip) {
  RunConfig cfg;
  cfg.scene.height = 96;
  cfg.scene.background = "grid";
  cfg.consensus.gamma = 0.02;
  cfg.consensus.gamma_grid = {0.01, 0.03};
  cfg.seed = 99;
  const RunConfig back = config_from_json(to_json(cfg));
  EXPECT_EQ(to_json(back), to_json(cfg));
  EXPECT_EQ(back.scene.height, 96);
  EXPECT_EQ(back.seed, 99u);
}

TEST(RunConfig, MissingKeysKeepDefaults) {
  const RunConfig cfg = config_from_json(nlohmann::json{{"consensus", {{"gamma", 0.03}}}});
  EXPECT_EQ(cfg.consensus.gamma, 0.03);
  EXPECT_EQ(cfg.consensus.window_px, RunConfig{}.consensus.window_px);
}

TEST(RunConfig, RejectsUnknownKeys) {
  EXPECT_THROW(config_from_json(nlohmann::json{{"bogus", 1}}), ParameterError);
  EXPECT_THROW(config_from_json(nlohmann::json{{"scene", {{"heigth", 10}}}}), ParameterError);
}

TEST(RunConfig, RejectsInvalidValues) {
  EXPECT_THROW(config_from_json(nlohmann::json{{"consensus", {{"stride_px", 100}}}}), ParameterError);
  EXPECT_THROW(config_from_json(nlohmann::json{{"consensus", {{"objective", "louvain"}}}}), ParameterError);
  EXPECT_THROW(config_from_json(nlohmann::json{{"posterior", {{"n_post", 0}}}}), ParameterError);
  EXPECT_THROW(config_from_json(nlohmann::json{{"consensus", {{"restarts", 0}}}}), ParameterError);
  EXPECT_THROW(config_from_json(nlohmann::json{{"scene", {{"min_obj_px", 50}, {"max_obj_px", 40}}}}),
               ParameterError);
}

TEST(RunConfig, LoadsFromFile) {
  const auto path = std::filesystem::temp_directory_path() / "segstitch_cfg_test.json";
  {
    std::ofstream out(path);
    out << R"({"seed": 5, "posterior": {"n_post": 4}})";
  }
  const RunConfig cfg = load_config(path.string());
  EXPECT_EQ(cfg.seed, 5u);
  EXPECT_EQ(cfg.posterior.n_post, 4);
  std::filesystem::remove(path);
  EXPECT_ANY_THROW(load_config(path.string()));
}

}  // namespace
}  // namespace segstitch::cli

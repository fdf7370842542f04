#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "segstitch/cli/dataset.hpp"
#include "segstitch/cli/eval.hpp"
#include "segstitch/cli/formats.hpp"
#include "segstitch/cli/pipeline.hpp"
#include "segstitch/cli/runlog.hpp"
#include "segstitch/metrics.hpp"

namespace segstitch::cli {
namespace {

namespace fs = std::filesystem;

fs::path fresh_dir(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("segstitch_pipeline_" + name);
  fs::remove_all(dir);
  return dir;
}

RunConfig small_config() {
  RunConfig cfg;
  cfg.posterior.n_post = 4;
  return cfg;
}

// One synthesized test scene, loaded back from disk.
const SceneData& shared_scene() {
  static const SceneData scene = [] {
    const auto dir = fresh_dir("shared");
    synthesize(small_config(), dir, 0, 1);
    return load_scene(dir / "test" / "scene_00000");
  }();
  return scene;
}

TEST(Synth, IsDeterministicAndSeedSensitive) {
  RunConfig cfg = small_config();
  const auto a = synthesize(cfg, fresh_dir("a"), 2, 1);
  const auto b = synthesize(cfg, fresh_dir("b"), 2, 1);
  EXPECT_EQ(a.train, 2);
  EXPECT_EQ(a.test, 1);
  EXPECT_EQ(a.manifest.at("checksum"), b.manifest.at("checksum"));
  cfg.seed = 2;
  const auto c = synthesize(cfg, fresh_dir("c"), 2, 1);
  EXPECT_NE(a.manifest.at("checksum"), c.manifest.at("checksum"));
}

TEST(Synth, WritesEveryFileAndLoadsBack) {
  const auto dir = fresh_dir("files");
  synthesize(small_config(), dir, 1, 1);
  EXPECT_TRUE(fs::exists(dir / "manifest.json"));
  const auto scenes = list_scenes(dir / "train");
  ASSERT_EQ(scenes.size(), 1u);
  for (const char* f : kSceneFiles) EXPECT_TRUE(fs::exists(scenes[0] / f)) << f;
  const SceneData s = load_scene(scenes[0]);
  EXPECT_TRUE(s.has_truth());
  EXPECT_EQ(s.image.height(), 80);
  EXPECT_EQ(s.truth_pi.instances(), static_cast<int>(s.truth_boxes.size()));
  EXPECT_EQ(s.truth_labels.rows(), 80);
}

TEST(Synth, VanishingDensityGivesBackgroundOnlyScenes) {
  RunConfig cfg = small_config();
  cfg.scene.rho = 1e-9;
  const auto dir = fresh_dir("empty");
  synthesize(cfg, dir, 0, 3);
  for (const auto& p : list_scenes(dir / "test")) {
    const SceneData s = load_scene(p);
    EXPECT_TRUE(s.truth_boxes.empty());
    for (auto v : s.truth_labels.values()) EXPECT_EQ(v, 0);
  }
}

TEST(Synth, BareImageLoadsWithoutTruth) {
  const auto dir = fresh_dir("bare");
  fs::create_directories(dir);
  write_gray_png(dir / "x.png", shared_scene().image, 16);
  const SceneData s = load_scene(dir / "x.png");
  EXPECT_FALSE(s.has_truth());
  EXPECT_EQ(s.image.height(), shared_scene().image.height());
  EXPECT_THROW(run_segment(s, small_config(), {}), ParameterError);
  EXPECT_THROW(load_scene(dir / "missing"), FormatError);
}

TEST(Segment, OverlappingRunRecoversScene) {
  SegmentOptions opt;
  opt.score = true;
  const auto out = run_segment(shared_scene(), small_config(), opt);
  ASSERT_FALSE(out.truth.empty());
  EXPECT_GT(adjusted_rand_index(out.truth, out.labels), 0.8);
  EXPECT_GT(out.edges, 0u);
  EXPECT_GT(out.score, 0.5);
  EXPECT_LE(out.score, 1.0);
  EXPECT_EQ(out.gamma, small_config().consensus.gamma);
}

TEST(Segment, SameSeedSameLabels) {
  SegmentOptions opt;
  opt.seed = 3;
  const auto a = run_segment(shared_scene(), small_config(), opt);
  opt.max_workers = 1;
  const auto b = run_segment(shared_scene(), small_config(), opt);
  EXPECT_EQ(a.labels, b.labels);
}

TEST(Segment, DisjointModeReportsNoGamma) {
  SegmentOptions opt;
  opt.windows = WindowMode::disjoint;
  const auto out = run_segment(shared_scene(), small_config(), opt);
  EXPECT_TRUE(std::isnan(out.gamma));
  EXPECT_EQ(out.communities, count_segments(out.labels, 1));
}

TEST(Segment, FileSamplesReproduceSimulation) {
  const RunConfig cfg = small_config();
  for (auto mode : {WindowMode::overlapping, WindowMode::disjoint}) {
    const auto dir = fresh_dir(mode == WindowMode::overlapping ? "samples_o" : "samples_d");
    export_samples(shared_scene(), cfg, mode, 5, dir);
    SegmentOptions opt;
    opt.windows = mode;
    opt.seed = 5;
    const auto simulated = run_segment(shared_scene(), cfg, opt);
    opt.samples_dir = dir;
    const auto from_files = run_segment(shared_scene(), cfg, opt);
    EXPECT_EQ(simulated.labels, from_files.labels);
  }
}

TEST(Segment, MissingSampleFileIsReported) {
  const auto dir = fresh_dir("samples_missing");
  fs::create_directories(dir);
  SegmentOptions opt;
  opt.samples_dir = dir;
  EXPECT_ANY_THROW(run_segment(shared_scene(), small_config(), opt));
}

TEST(Segment, RegionRunsOnTheCrop) {
  SegmentOptions opt;
  opt.region = {10, 20, 50, 40};
  const auto out = run_segment(shared_scene(), small_config(), opt);
  EXPECT_EQ(out.labels.rows(), 40);
  EXPECT_EQ(out.labels.cols(), 50);
  EXPECT_EQ(out.truth.rows(), 40);
  opt.region = {70, 70, 20, 20};
  EXPECT_THROW(run_segment(shared_scene(), small_config(), opt), ParameterError);
  opt.region = {0, 0, 0, 5};
  EXPECT_THROW(run_segment(shared_scene(), small_config(), opt), ParameterError);
}

TEST(Segment, AutomaticResolutionChoosesFromGrid) {
  SegmentOptions opt;
  opt.resolution = ResolutionMode::automatic;
  const RunConfig cfg = small_config();
  const auto out = run_segment(shared_scene(), cfg, opt);
  ASSERT_EQ(out.gamma_scores.size(), cfg.consensus.gamma_grid.size());
  EXPECT_NE(std::find(cfg.consensus.gamma_grid.begin(), cfg.consensus.gamma_grid.end(), out.gamma),
            cfg.consensus.gamma_grid.end());
}

TEST(Segment, SampleNamesEncodeSignedOrigins) {
  EXPECT_EQ(sample_file_name(-30, 20, 3), "r-30_c20_s3.mimg");
  EXPECT_EQ(sample_file_name(0, 0, 0), "r0_c0_s0.mimg");
}

TEST(Eval, PerfectPredictionScoresOne) {
  LabelMap truth(10, 10, 0);
  for (int y = 0; y < 5; ++y)
    for (int x = 0; x < 5; ++x) truth(y, x) = 1;
  for (int y = 6; y < 10; ++y)
    for (int x = 6; x < 10; ++x) truth(y, x) = 2;
  LabelMap renamed = truth;
  for (auto& v : renamed.storage())
    if (v > 0) v += 10;
  const auto s = score_scene(truth, renamed, 1);
  EXPECT_EQ(s.true_k, 2);
  EXPECT_EQ(s.est_k, 2);
  EXPECT_DOUBLE_EQ(s.ari, 1.0);
  EXPECT_DOUBLE_EQ(s.nmi, 1.0);
  EXPECT_EQ(s.boundary_splits, 0);
  EXPECT_EQ(score_scene(truth, renamed, 20).est_k, 1);
}

TEST(Eval, ReportAggregates) {
  EvalReport r;
  r.scenes = {{3, 3, 1.0, 1.0, 0}, {3, 5, 0.5, 0.6, 2}, {2, 1, 0.9, 0.8, 1}, {1, 1, 0.6, 0.7, 0}};
  EXPECT_DOUBLE_EQ(r.count_accuracy(1), 0.75);
  EXPECT_DOUBLE_EQ(r.count_accuracy(0), 0.5);
  EXPECT_DOUBLE_EQ(r.ari().mean, 0.75);
  EXPECT_LT(r.ari().lo, 0.75);
  EXPECT_GT(r.ari().hi, 0.75);
  EXPECT_EQ(r.total_splits(), 3);
  const auto j = to_json(r);
  EXPECT_EQ(j.at("scenes").size(), 4u);
  const Interval flat = mean_interval({2.0, 2.0, 2.0});
  EXPECT_EQ(flat.lo, 2.0);
  EXPECT_EQ(flat.hi, 2.0);
}

TEST(RunLog, WritesNumberedRecordsIntoNewDirectories) {
  const auto path = fresh_dir("log") / "nested" / "run.jsonl";
  {
    RunLog log(path.string());
    ASSERT_TRUE(log.enabled());
    log.write("scene", {{"index", 0}});
    log.write("sapr", {{"state", to_json(SaprState{})}});
  }
  std::ifstream in(path);
  std::string line;
  std::vector<nlohmann::json> records;
  while (std::getline(in, line)) records.push_back(nlohmann::json::parse(line));
  ASSERT_EQ(records.size(), 2u);
  EXPECT_EQ(records[0].at("type"), "scene");
  EXPECT_EQ(records[0].at("index"), 0);
  EXPECT_EQ(records[1].at("type"), "sapr");
  EXPECT_LT(records[0].at("seq").get<long long>(), records[1].at("seq").get<long long>());
  EXPECT_TRUE(records[1].at("state").contains("density"));
  RunLog disabled;
  EXPECT_FALSE(disabled.enabled());
  disabled.write("ignored", {});
}

}  // namespace
}  // namespace segstitch::cli

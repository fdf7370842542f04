#include <gtest/gtest.h>

#include <chrono>
#include <filesystem>
#include <thread>

#include "segstitch/cli/dataset.hpp"
#include "segstitch/cli/formats.hpp"
#include "segstitch/cli/pipeline.hpp"
#include "segstitch/cli/service.hpp"

// After the project headers: resolv.h, pulled in here, defines _res, which
// collides with Eigen internals.
#include <httplib.h>

namespace segstitch::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

// A 160 px scene keeps a full-image job busy long enough to observe 409.
RunConfig service_config() {
  RunConfig cfg;
  cfg.scene.height = 160;
  cfg.scene.width = 160;
  return cfg;
}

const SceneData& service_scene() {
  static const SceneData scene = [] {
    const auto dir = fs::temp_directory_path() / "segstitch_service_scene";
    fs::remove_all(dir);
    synthesize(service_config(), dir, 0, 1);
    return load_scene(dir / "test" / "scene_00000");
  }();
  return scene;
}

class ServiceTest : public ::testing::Test {
 protected:
  void SetUp() override {
    service_ = std::make_unique<Service>(service_scene(), service_config());
    port_ = service_->bind("127.0.0.1", 0);
    thread_ = std::thread([this] { service_->run(); });
    client_ = std::make_unique<httplib::Client>("127.0.0.1", port_);
    client_->set_read_timeout(120, 0);
    for (int i = 0; i < 100 && !client_->Get("/v1/image/meta"); ++i)
      std::this_thread::sleep_for(std::chrono::milliseconds(10));
  }

  void TearDown() override {
    service_->stop();
    thread_.join();
  }

  httplib::Result post(const std::string& path, const json& body) {
    return client_->Post(path, body.dump(), "application/json");
  }

  json wait_for_job(int id) {
    for (int i = 0; i < 2000; ++i) {
      auto res = client_->Get("/v1/job/" + std::to_string(id));
      if (!res || res->status != 200) return {};
      json j = json::parse(res->body);
      if (j.at("status") != "running") return j;
      std::this_thread::sleep_for(std::chrono::milliseconds(20));
    }
    return {};
  }

  std::unique_ptr<Service> service_;
  std::unique_ptr<httplib::Client> client_;
  std::thread thread_;
  int port_ = 0;
};

TEST_F(ServiceTest, MetaDescribesImage) {
  auto res = client_->Get("/v1/image/meta");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 200);
  const json j = json::parse(res->body);
  EXPECT_EQ(j.at("height"), 160);
  EXPECT_EQ(j.at("width"), 160);
  EXPECT_EQ(j.at("has_truth"), true);
  EXPECT_EQ(j.at("window_px"), 80);
}

TEST_F(ServiceTest, RegionTileIsPng) {
  auto res = client_->Get("/v1/region?x=10&y=20&w=30&h=40");
  ASSERT_TRUE(res);
  ASSERT_EQ(res->status, 200);
  EXPECT_EQ(res->get_header_value("Content-Type"), "image/png");
  const std::vector<std::uint8_t> bytes(res->body.begin(), res->body.end());
  const Image tile = decode_gray_png(bytes);
  EXPECT_EQ(tile.height(), 40);
  EXPECT_EQ(tile.width(), 30);
  const double expected = std::clamp(service_scene().image(20, 10), 0.0, 1.0);
  EXPECT_NEAR(tile(0, 0), expected, 0.5 / 255.0 + 1e-9);
}

TEST_F(ServiceTest, RegionRejectsBadQueries) {
  EXPECT_EQ(client_->Get("/v1/region?x=150&y=0&w=30&h=10")->status, 400);
  EXPECT_EQ(client_->Get("/v1/region?x=0&y=0&w=0&h=10")->status, 400);
  EXPECT_EQ(client_->Get("/v1/region?x=a&y=0&w=5&h=5")->status, 400);
  EXPECT_EQ(client_->Get("/v1/region?x=0&y=0")->status, 400);
}

TEST_F(ServiceTest, SegmentIsDeterministicAndMatchesLibrary) {
  const json body{{"region", {{"x", 20}, {"y", 30}, {"w", 100}, {"h", 90}}}, {"gamma", 0.01}, {"seed", 4}};
  auto a = post("/v1/segment", body);
  auto b = post("/v1/segment", body);
  ASSERT_TRUE(a && b);
  ASSERT_EQ(a->status, 200) << a->body;
  EXPECT_EQ(a->body, b->body);
  const json j = json::parse(a->body);
  EXPECT_EQ(j.at("region").at("w"), 100);
  EXPECT_GE(j.at("nmi").get<double>(), 0.0);
  EXPECT_LE(j.at("nmi").get<double>(), 1.0);

  SegmentOptions opt;
  opt.region = {20, 30, 100, 90};
  opt.gamma = 0.01;
  opt.seed = 4;
  const auto direct = run_segment(service_scene(), service_config(), opt);
  EXPECT_EQ(labels_from_rle(j.at("labels")), direct.labels);
  EXPECT_EQ(j.at("communities"), direct.communities);
}

TEST_F(ServiceTest, SegmentRejectsBadRequests) {
  EXPECT_EQ(post("/v1/segment", {{"gamma", -1.0}})->status, 400);
  EXPECT_EQ(post("/v1/segment", {{"gamma", "high"}})->status, 400);
  EXPECT_EQ(post("/v1/segment", {{"seed", -3}})->status, 400);
  EXPECT_EQ(post("/v1/segment", {{"region", {{"x", 0}}}})->status, 400);
  EXPECT_EQ(post("/v1/segment", {{"region", {{"x", 100}, {"y", 0}, {"w", 100}, {"h", 10}}}})->status, 400);
  EXPECT_EQ(client_->Post("/v1/segment", "{not json", "application/json")->status, 400);
}

TEST_F(ServiceTest, HigherGammaNeverMergesMore) {
  int previous = -1;
  for (double gamma : {0.002, 0.05, 0.5}) {
    auto res = post("/v1/segment", {{"gamma", gamma}, {"seed", 1}});
    ASSERT_TRUE(res);
    ASSERT_EQ(res->status, 200);
    const int k = json::parse(res->body).at("communities").get<int>();
    EXPECT_GE(k, previous) << gamma;
    previous = k;
  }
}

TEST_F(ServiceTest, CommitRunsOneJobAtATime) {
  auto first = post("/v1/commit", {{"gamma", 0.01}, {"seed", 2}});
  ASSERT_TRUE(first);
  ASSERT_EQ(first->status, 202);
  const int id = json::parse(first->body).at("job").get<int>();
  auto second = post("/v1/commit", {{"gamma", 0.01}, {"seed", 2}});
  ASSERT_TRUE(second);
  EXPECT_EQ(second->status, 409);

  const json job = wait_for_job(id);
  ASSERT_FALSE(job.is_null());
  ASSERT_EQ(job.at("status"), "done");
  SegmentOptions opt;
  opt.gamma = 0.01;
  opt.seed = 2;
  const auto direct = run_segment(service_scene(), service_config(), opt);
  EXPECT_EQ(labels_from_rle(job.at("result").at("labels")), direct.labels);
  EXPECT_EQ(job.at("result").at("communities"), direct.communities);

  auto again = post("/v1/commit", {{"gamma", 0.02}});
  ASSERT_TRUE(again);
  EXPECT_EQ(again->status, 202);
  EXPECT_EQ(json::parse(again->body).at("job"), id + 1);
}

TEST_F(ServiceTest, UnknownJobIs404) {
  auto res = client_->Get("/v1/job/999");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 404);
}

}  // namespace
}  // namespace segstitch::cli

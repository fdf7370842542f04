#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "segstitch/scene.hpp"
#include "support.hpp"

namespace segstitch {
namespace {

Raster constant_raster(int h, int w, double weight, double appearance) {
  return {Image(h, w, 1, appearance), Array2D<double>(h, w, weight)};
}

TEST(Blob, RadiusIsFourierSeries) {
  FourierBlobParams p;
  p.mean_radius = 5.0;
  p.harmonics = {{0.5, 0.0}, {0.25, std::numbers::pi / 2}};
  const double t = 0.3;
  EXPECT_NEAR(blob_radius(p, t), 5.0 + 0.5 * std::cos(t) + 0.25 * std::cos(2 * t + std::numbers::pi / 2), 1e-14);
}

TEST(Blob, CircleCoversExpectedArea) {
  FourierBlobParams p;
  p.origin_x = p.origin_y = 13.5;
  p.mean_radius = 10.0;
  const auto r = render_blob(p, 28, 28);
  double area = 0.0;
  for (double v : r.weights.values()) area += v > 0 ? 1.0 : 0.0;
  EXPECT_NEAR(area, std::numbers::pi * 100.0, 0.05 * std::numbers::pi * 100.0);
  EXPECT_DOUBLE_EQ(r.weights(14, 14), kWeightCeiling);
  EXPECT_DOUBLE_EQ(r.appearance(14, 14), 1.0);
  EXPECT_DOUBLE_EQ(r.weights(0, 0), 0.0);
}

TEST(Blob, RejectsNonPositiveRadius) {
  FourierBlobParams p;
  p.mean_radius = 1.0;
  p.harmonics = {{2.0, 0.0}};
  EXPECT_THROW(render_blob(p, 10, 10), ParameterError);
}

TEST(Background, FlatAndOrientedGrid) {
  BackgroundSpec flat;
  flat.level = 0.2;
  const auto f = render_background(flat, 5, 6);
  for (double v : f.values()) EXPECT_DOUBLE_EQ(v, 0.2);

  BackgroundSpec grid;
  grid.kind = BackgroundKind::oriented_grid;
  grid.spacing_px = 4.0;
  grid.contrast = 0.5;
  grid.line_width_px = 0.5;
  const auto g = render_background(grid, 8, 8);
  // Angle 0: vertical lines, so every row is identical.
  for (int y = 1; y < 8; ++y)
    for (int x = 0; x < 8; ++x) EXPECT_DOUBLE_EQ(g(y, x), g(0, x));
  EXPECT_DOUBLE_EQ(g(0, 0), 0.5);
  EXPECT_DOUBLE_EQ(g(0, 2), 0.0);
  EXPECT_DOUBLE_EQ(g(0, 4), 0.5);
}

TEST(Paste, ZeroOutsideBoxAndExactForUnitScale) {
  const Raster r = constant_raster(10, 10, 0.7, 0.4);
  const auto layer = paste(r, {15.0, 12.0, 10.0, 10.0}, 30, 30);
  for (int y = 0; y < 30; ++y)
    for (int x = 0; x < 30; ++x) {
      const bool inside = x + 0.5 > 10.0 && x + 0.5 < 20.0 && y + 0.5 > 7.0 && y + 0.5 < 17.0;
      if (!inside) {
        EXPECT_EQ(layer.weights(y, x), 0.0) << y << "," << x;
      } else {
        EXPECT_NEAR(layer.weights(y, x), 0.7, 1e-12);
        EXPECT_NEAR(layer.appearance(y, x), 0.4, 1e-12);
      }
    }
}

TEST(Paste, OffCanvasPartIsClipped) {
  Raster r = constant_raster(10, 10, 0.0, 0.0);
  for (int y = 0; y < 10; ++y)
    for (int x = 0; x < 10; ++x) r.weights(y, x) = 0.01 * (y * 10 + x);
  // Box centered on the left edge: the right half of the raster lands on canvas.
  const auto layer = paste(r, {0.0, 5.0, 10.0, 10.0}, 10, 10);
  for (int y = 0; y < 10; ++y)
    for (int x = 0; x < 5; ++x) EXPECT_NEAR(layer.weights(y, x), r.weights(y, x + 5), 1e-12);
  EXPECT_EQ(layer.weights(0, 5), 0.0);
}

TEST(Crop, InvertsPasteAtUnitScale) {
  Image img(20, 20);
  for (int y = 0; y < 20; ++y)
    for (int x = 0; x < 20; ++x) img(y, x) = 0.01 * y + 0.001 * x;
  const auto c = crop(img, {10.0, 8.0, 6.0, 4.0}, 4, 6);
  for (int y = 0; y < 4; ++y)
    for (int x = 0; x < 6; ++x) EXPECT_NEAR(c(y, x), img(6 + y, 7 + x), 1e-12);
}

TEST(Mix, RandomStacksAreSimplicesAndZeroOutsideBoxes) {
  Rng rng(4);
  for (int rep = 0; rep < 100; ++rep) {
    const int k = static_cast<int>(uniform_int(rng, 0, 6));
    std::vector<Layer> layers;
    for (int i = 0; i < k; ++i) {
      const BoundingBox b{30 * uniform01(rng), 30 * uniform01(rng), 4 + 12 * uniform01(rng), 4 + 12 * uniform01(rng)};
      Raster r = constant_raster(8, 8, 0.0, 1.0);
      for (double& v : r.weights.values()) v = uniform01(rng) * kWeightCeiling;
      layers.push_back(paste(r, b, 30, 30));
    }
    const auto pi = mix(layers, 30, 30);
    EXPECT_NO_THROW(pi.validate(1e-9));
    for (int i = 0; i < k; ++i)
      for (int y = 0; y < 30; ++y)
        for (int x = 0; x < 30; ++x)
          if (layers[static_cast<std::size_t>(i)].weights(y, x) == 0.0) EXPECT_EQ(pi.at(i + 1, y, x), 0.0);
  }
}

TEST(Mix, SingleLayerPassesThrough) {
  Raster r = constant_raster(6, 6, 0.0, 1.0);
  for (int y = 0; y < 6; ++y)
    for (int x = 0; x < 6; ++x) r.weights(y, x) = 0.1 * ((x + y) % 9);
  const Layer l = paste(r, {8.0, 8.0, 6.0, 6.0}, 16, 16);
  const auto pi = mix(std::span<const Layer>(&l, 1), 16, 16);
  for (int y = 0; y < 16; ++y)
    for (int x = 0; x < 16; ++x) {
      EXPECT_EQ(pi.at(1, y, x), l.weights(y, x));
      EXPECT_EQ(pi.at(0, y, x), 1.0 - l.weights(y, x));
    }
}

TEST(Mix, OverfullPixelsAreRenormalized) {
  std::vector<Array2D<double>> w(2, Array2D<double>(1, 1, 0.9));
  const auto pi = mix(w, 1, 1);
  EXPECT_DOUBLE_EQ(pi.at(1, 0, 0), 0.5);
  EXPECT_DOUBLE_EQ(pi.at(2, 0, 0), 0.5);
  EXPECT_DOUBLE_EQ(pi.at(0, 0, 0), 0.0);
}

TEST(SampleMask, FollowsCategoricalFrequencies) {
  std::vector<Array2D<double>> w{Array2D<double>(40, 40, 0.3), Array2D<double>(40, 40, 0.5)};
  const auto pi = mix(w, 40, 40);
  Rng rng(12);
  int counts[3] = {0, 0, 0};
  for (int rep = 0; rep < 10; ++rep) {
    const auto m = sample_mask(pi, rng);
    for (auto v : m.values()) ++counts[v];
  }
  const double n = 16000.0;
  EXPECT_NEAR(counts[0] / n, 0.2, 0.015);
  EXPECT_NEAR(counts[1] / n, 0.3, 0.015);
  EXPECT_NEAR(counts[2] / n, 0.5, 0.015);
}

TEST(Compose, NoiselessCompositeCopiesAssignedLayer) {
  const Raster r = constant_raster(4, 4, 0.9, 0.8);
  const std::vector<Layer> layers{paste(r, {4.0, 4.0, 4.0, 4.0}, 8, 8)};
  LabelMap mask(8, 8, 0);
  mask(3, 3) = 1;
  const Image bg(8, 8, 1, 0.1);
  Rng rng(1);
  const auto x = compose(mask, bg, layers, 0.0, rng);
  EXPECT_DOUBLE_EQ(x(3, 3), 0.8);
  EXPECT_DOUBLE_EQ(x(0, 0), 0.1);
}

TEST(Compose, NoiseHasRequestedScale) {
  const LabelMap mask(100, 100, 0);
  const Image bg(100, 100, 1, 0.0);
  Rng rng(2);
  const auto x = compose(mask, bg, {}, 0.05, rng);
  double ss = 0.0;
  for (double v : x.values()) ss += v * v;
  EXPECT_NEAR(std::sqrt(ss / 1e4), 0.05, 0.002);
}

TEST(Scene, GenerationIsDeterministicAndConsistent) {
  SceneConfig cfg;
  Rng a(42), b(42);
  const auto s1 = generate_scene(cfg, a);
  const auto s2 = generate_scene(cfg, b);
  EXPECT_EQ(s1.image, s2.image);
  EXPECT_EQ(s1.truth_labels, s2.truth_labels);
  EXPECT_EQ(s1.truth_pi.instances(), static_cast<int>(s1.truth_boxes.size()));
  EXPECT_NO_THROW(s1.truth_pi.validate());
  for (auto v : s1.truth_labels.values()) EXPECT_LE(v, s1.truth_pi.instances());
}

TEST(Scene, NearZeroDensityGivesBackgroundOnly) {
  SceneConfig cfg;
  cfg.kernel.rho = 1e-12;
  Rng rng(3);
  const auto s = generate_scene(cfg, rng);
  EXPECT_EQ(s.truth_pi.instances(), 0);
  for (auto v : s.truth_labels.values()) EXPECT_EQ(v, 0);
}

TEST(CropStack, DropsAbsentInstancesAndPadsWithBackground) {
  const auto pi = test::rect_stack(20, 20, {{2, 2, 6, 6}, {12, 12, 18, 18}});
  const auto c = crop_stack(pi, -4, -4, 12, 12);
  EXPECT_EQ(c.instances(), 1);
  EXPECT_DOUBLE_EQ(c.at(0, 0, 0), 1.0);
  EXPECT_DOUBLE_EQ(c.at(1, 6, 6), pi.at(1, 2, 2));
  EXPECT_NO_THROW(c.validate());
}

TEST(PosteriorSimulator, ZeroNoiseReproducesTruth) {
  const auto pi = test::rect_stack(40, 40, {{2, 2, 12, 12}, {20, 25, 30, 35}});
  Rng rng(5);
  const auto samples = simulate_posterior_samples(pi, 10, PosteriorNoise{}, 3, rng);
  for (const auto& s : samples) EXPECT_EQ(s, pi);
  const PosteriorSimulator sim(pi, 10, PosteriorNoise{});
  EXPECT_EQ(sim.sample(-5, 10, 30, 30, rng), crop_stack(pi, -5, 10, 30, 30));
}

TEST(PosteriorSimulator, WindowSampleMatchesSimulatingTheCrop) {
  SceneConfig cfg;
  cfg.grid = GridSpec(120, 120, 16, 32);
  Rng scene_rng(9);
  const auto scene = generate_scene(cfg, scene_rng);
  const PosteriorNoise noise{0.1, 2.0, 0.05, 0.3};
  const PosteriorSimulator sim(scene.truth_pi, 16, noise);
  for (int rep = 0; rep < 30; ++rep) {
    const int row0 = -20 + 10 * (rep % 7);
    const int col0 = 50 - 10 * (rep % 5);
    Rng a(1000 + rep), b(1000 + rep);
    const auto windowed = sim.sample(row0, col0, 60, 60, a);
    const auto reference = simulate_posterior_samples(crop_stack(scene.truth_pi, row0, col0, 60, 60), 16, noise, 1, b);
    EXPECT_EQ(windowed, reference[0]) << rep;
    EXPECT_NO_THROW(windowed.validate(1e-9));
  }
}

TEST(PosteriorSimulator, DropRemovesEveryInstance) {
  const auto pi = test::rect_stack(30, 30, {{2, 2, 12, 12}, {15, 15, 25, 25}});
  Rng rng(6);
  const auto s = simulate_posterior_samples(pi, 10, PosteriorNoise{0.0, 0.0, 1.0, 0.0}, 1, rng);
  EXPECT_EQ(s[0].instances(), 0);
}

TEST(PosteriorSimulator, SplitProducesTwoPieces) {
  const auto pi = test::rect_stack(30, 30, {{5, 5, 25, 25}});
  Rng rng(7);
  const auto s = simulate_posterior_samples(pi, 10, PosteriorNoise{0.0, 0.0, 0.0, 1.0}, 1, rng);
  EXPECT_EQ(s[0].instances(), 2);
  for (int y = 0; y < 30; ++y)
    for (int x = 0; x < 30; ++x)
      EXPECT_NEAR(s[0].at(1, y, x) + s[0].at(2, y, x), pi.at(1, y, x), 1e-12);
}

TEST(PosteriorSimulator, RejectsBadNoise) {
  const auto pi = test::rect_stack(10, 10, {{1, 1, 4, 4}});
  EXPECT_THROW(PosteriorSimulator(pi, 10, PosteriorNoise{2.0, 0.0, 0.0, 0.0}), ParameterError);
  EXPECT_THROW(PosteriorSimulator(pi, 0, PosteriorNoise{}), ParameterError);
}

}  // namespace
}  // namespace segstitch

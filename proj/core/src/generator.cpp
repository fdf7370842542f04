#include <algorithm>
#include <cmath>
#include <numbers>

#include "segstitch/scene.hpp"

namespace segstitch {

FourierBlobParams sample_blob_params(const BlobPrior& prior, int raster_h, int raster_w, Rng& rng) {
  if (!(prior.radius_frac_min > 0.0 && prior.radius_frac_min <= prior.radius_frac_max))
    throw ParameterError("BlobPrior: need 0 < radius_frac_min <= radius_frac_max");
  if (prior.max_harmonics < 0 || prior.max_harmonics > kMaxBlobHarmonics)
    throw ParameterError("BlobPrior: max_harmonics must lie in [0, 5]");
  if (!(prior.max_amplitude_frac >= 0.0 && prior.max_amplitude_frac <= kMaxHarmonicAmplitude))
    throw ParameterError("BlobPrior: max_amplitude_frac must lie in [0, 0.4]");

  const double half = 0.5 * std::min(raster_h, raster_w);
  FourierBlobParams p;
  p.intensity = prior.intensity;
  p.origin_x = 0.5 * raster_w + (2.0 * uniform01(rng) - 1.0) * prior.origin_jitter_frac * raster_w;
  p.origin_y = 0.5 * raster_h + (2.0 * uniform01(rng) - 1.0) * prior.origin_jitter_frac * raster_h;
  p.mean_radius = half * (prior.radius_frac_min + (prior.radius_frac_max - prior.radius_frac_min) * uniform01(rng));

  const auto n_harm = static_cast<int>(uniform_int(rng, 0, prior.max_harmonics));
  double total = 0.0;
  for (int i = 0; i < n_harm; ++i) {
    FourierHarmonic h;
    h.amplitude = prior.max_amplitude_frac * p.mean_radius * uniform01(rng);
    h.phase = 2.0 * std::numbers::pi * uniform01(rng);
    total += h.amplitude;
    p.harmonics.push_back(h);
  }
  // Keep the boundary at least 20% of the mean radius away from the origin.
  const double budget = 0.8 * p.mean_radius;
  if (total > budget)
    for (auto& h : p.harmonics) h.amplitude *= budget / total;
  return p;
}

SceneGenerator::SceneGenerator(SceneConfig config)
    : config_(std::move(config)),
      kernel_(build_rbf_kernel(config_.grid, config_.kernel)),
      sampler_(kernel_) {
  if (!(config_.sigma > 0.0)) throw ParameterError("SceneConfig: sigma must be positive");
  if (config_.raster_h <= 0 || config_.raster_w <= 0 || config_.channels <= 0)
    throw ParameterError("SceneConfig: raster dims and channels must be positive");
}

SceneBundle SceneGenerator::generate(Rng& rng) const {
  const auto& cfg = config_;
  const int H = cfg.grid.height_px();
  const int W = cfg.grid.width_px();

  const BinaryField c = sampler_.sample(rng);

  std::vector<BoundingBox> boxes;
  for (int iy = 0; iy < c.rows(); ++iy) {
    for (int ix = 0; ix < c.cols(); ++ix) {
      if (c(iy, ix) == 0) continue;
      BoxLatent v{};
      for (double& vi : v) vi = standard_normal(rng);
      boxes.push_back(saf_transform(v, cfg.saf, {ix, iy}, cfg.grid));
    }
  }

  std::vector<Layer> layers;
  layers.reserve(boxes.size());
  for (const auto& box : boxes) {
    const auto blob = sample_blob_params(cfg.blob, cfg.raster_h, cfg.raster_w, rng);
    const Raster raster = render_blob(blob, cfg.raster_h, cfg.raster_w, cfg.channels);
    layers.push_back(paste(raster, box, H, W));
  }

  BackgroundSpec bg;
  bg.kind = cfg.background.kind;
  bg.level = cfg.background.level;
  if (bg.kind == BackgroundKind::oriented_grid) {
    bg.spacing_px = cfg.background.spacing_min_px +
                    (cfg.background.spacing_max_px - cfg.background.spacing_min_px) * uniform01(rng);
    bg.angle_deg = kGridAnglesDeg[static_cast<std::size_t>(uniform_int(rng, 0, 3))];
    bg.contrast = cfg.background.contrast;
    bg.line_width_px = cfg.background.line_width_px;
    bg.phase_px = bg.spacing_px * uniform01(rng);
  }

  SceneBundle out;
  out.grid = cfg.grid;
  out.sigma = cfg.sigma;
  out.background = render_background(bg, H, W, cfg.channels);
  out.truth_boxes = boxes;
  out.truth_pi = mix(std::span<const Layer>(layers), H, W);
  out.truth_labels = sample_mask(out.truth_pi, rng);
  out.image = compose(out.truth_labels, out.background, layers, cfg.sigma, rng);
  return out;
}

SceneBundle generate_scene(const SceneConfig& config, Rng& rng) {
  return SceneGenerator(config).generate(rng);
}

}  // namespace segstitch

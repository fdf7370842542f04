#include "segstitch/cli/pipeline.hpp"

#include <algorithm>
#include <cstdio>
#include <limits>

#include "segstitch/cli/formats.hpp"
#include "segstitch/metrics.hpp"

namespace segstitch::cli {

namespace fs = std::filesystem;

void Region::validate(int height, int width) const {
  if (whole()) return;
  if (w <= 0 || h <= 0) throw ParameterError("region must have positive width and height");
  if (x < 0 || y < 0 || x > width - w || y > height - h) throw ParameterError("region lies outside the image");
}

std::string sample_file_name(int row0, int col0, int s) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "r%d_c%d_s%d.mimg", row0, col0, s);
  return buf;
}

MixingStack region_truth(const SceneData& scene, const Region& region) {
  if (region.whole()) return scene.truth_pi;
  return crop_stack(scene.truth_pi, region.y, region.x, region.h, region.w);
}

namespace {

// Window origins are offset so the packed index stays non-negative.
constexpr std::uint64_t kOriginBias = 1u << 20;

std::uint64_t sample_index(int row0, int col0, int s) {
  return ((static_cast<std::uint64_t>(row0 + static_cast<std::int64_t>(kOriginBias)) << 42) |
          (static_cast<std::uint64_t>(col0 + static_cast<std::int64_t>(kOriginBias)) << 20)) ^
         static_cast<std::uint64_t>(s);
}

}  // namespace

WindowSampler simulated_sampler(std::shared_ptr<const PosteriorSimulator> sim, int window_px, std::uint64_t seed) {
  return [sim = std::move(sim), window_px, seed](std::size_t w, int s, const WindowPlan& plan) {
    const int row0 = plan.image_row(w);
    const int col0 = plan.image_col(w);
    Rng rng = make_rng(seed, "sample", sample_index(row0, col0, s));
    return sim->sample(row0, col0, window_px, window_px, rng);
  };
}

WindowSampler file_sampler(const fs::path& dir, int window_px) {
  return [dir, window_px](std::size_t w, int s, const WindowPlan& plan) {
    const fs::path path = dir / sample_file_name(plan.image_row(w), plan.image_col(w), s);
    MixingStack pi = stack_from_tensor(read_tensor(path));
    if (pi.height() != window_px || pi.width() != window_px)
      throw FormatError(path.string() + ": expected a " + std::to_string(window_px) + " px window");
    return pi;
  };
}

void export_samples(const SceneData& scene, const RunConfig& cfg, WindowMode mode, std::uint64_t seed,
                    const fs::path& dir) {
  if (!scene.has_truth()) throw ParameterError("simulated samples need a scene with truth");
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw FormatError("cannot create " + dir.string() + ": " + ec.message());
  const int window = cfg.consensus.window_px;
  const int stride = mode == WindowMode::overlapping ? cfg.consensus.stride_px : window;
  const int n_post = mode == WindowMode::overlapping ? cfg.posterior.n_post : 1;
  const auto sim = std::make_shared<const PosteriorSimulator>(scene.truth_pi, cfg.scene.min_obj_px, cfg.posterior_noise());
  const auto sampler = simulated_sampler(sim, window, seed);
  const TilePlan tiles = tile_plan(scene.image.height(), scene.image.width(), window, stride);
  for (std::size_t w = 0; w < tiles.plan.windows.size(); ++w)
    for (int s = 0; s < n_post; ++s)
      write_tensor(dir / sample_file_name(tiles.plan.image_row(w), tiles.plan.image_col(w), s),
                   to_tensor(sampler(w, s, tiles.plan)));
}

SegmentOutput run_segment(const SceneData& scene, const RunConfig& cfg, const SegmentOptions& opt) {
  cfg.validate();
  const int full_h = scene.image.height();
  const int full_w = scene.image.width();
  opt.region.validate(full_h, full_w);
  const int height = opt.region.whole() ? full_h : opt.region.h;
  const int width = opt.region.whole() ? full_w : opt.region.w;
  if (height <= 0 || width <= 0) throw ParameterError("empty image");

  const bool simulate = opt.samples_dir.empty();
  if (simulate && !scene.has_truth())
    throw ParameterError("simulated posteriors need a scene with truth; pass a samples directory instead");
  if (!simulate && !opt.region.whole()) throw ParameterError("sample files cover the whole image only");

  const int window = cfg.consensus.window_px;
  SegmentOutput out;
  MixingStack truth;
  if (scene.has_truth()) {
    truth = region_truth(scene, opt.region);
    out.truth = point_estimate(truth);
  }
  WindowSampler sampler;
  if (simulate) {
    auto sim = std::make_shared<const PosteriorSimulator>(truth, cfg.scene.min_obj_px, cfg.posterior_noise());
    sampler = simulated_sampler(std::move(sim), window, opt.seed);
  } else {
    sampler = file_sampler(opt.samples_dir, window);
  }

  if (opt.windows == WindowMode::disjoint) {
    out.labels = disjoint_point_estimate(height, width, window, sampler);
    out.communities = count_segments(out.labels, 1);
    out.gamma = std::numeric_limits<double>::quiet_NaN();
    return out;
  }

  ConsensusConfig cc = cfg.consensus_config();
  if (opt.gamma) cc.resolution.gamma = *opt.gamma;
  if (opt.resolution == ResolutionMode::automatic) cc.gamma_grid = cfg.consensus.gamma_grid;
  cc.max_workers = opt.max_workers;
  cc.score = opt.score;
  cc.keep_graph = opt.keep_graph;
  ConsensusResult r = consensus_segment(height, width, sampler, cc, opt.seed);
  out.labels = std::move(r.labels);
  out.communities = r.communities;
  out.gamma = r.gamma;
  out.edges = r.edges;
  out.gamma_scores = std::move(r.gamma_scores);
  out.score = r.score;
  out.graph = std::move(r.graph);
  return out;
}

}  // namespace segstitch::cli

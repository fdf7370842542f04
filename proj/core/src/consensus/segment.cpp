#include "segstitch/consensus/segment.hpp"

#include <algorithm>

#include "segstitch/metrics.hpp"
#include "segstitch/parallel.hpp"

namespace segstitch {

namespace {

LabelMap crop_labels(const LabelMap& full, const SampleView& view) {
  LabelMap out(view.labels.rows(), view.labels.cols(), 0);
  for (int y = 0; y < out.rows(); ++y)
    for (int x = 0; x < out.cols(); ++x)
      if (full.contains(view.row0 + y, view.col0 + x)) out(y, x) = full(view.row0 + y, view.col0 + x);
  return out;
}

// Sample labels with everything off the image set to background.
LabelMap clipped(const SampleView& view, int height, int width) {
  LabelMap out = view.labels;
  for (int y = 0; y < out.rows(); ++y)
    for (int x = 0; x < out.cols(); ++x) {
      const int gy = view.row0 + y;
      const int gx = view.col0 + x;
      if (gy < 0 || gx < 0 || gy >= height || gx >= width) out(y, x) = 0;
    }
  return out;
}

bool has_foreground(const LabelMap& m) {
  return std::any_of(m.values().begin(), m.values().end(), [](std::int32_t v) { return v > 0; });
}

}  // namespace

// Windows whose sample is all background say nothing about instance identity
// and are left out of the average.
double sample_agreement(const LabelMap& labels, std::span<const SampleView> samples) {
  double total = 0.0;
  std::size_t used = 0;
  for (const auto& s : samples) {
    const LabelMap view = clipped(s, labels.rows(), labels.cols());
    if (!has_foreground(view)) continue;
    total += foreground_nmi(crop_labels(labels, s), view);
    ++used;
  }
  return used == 0 ? 0.0 : total / static_cast<double>(used);
}

ResolutionChoice auto_resolution(const EdgeList& graph, std::span<const SampleView> samples,
                                 std::span<const double> gamma_grid, const ResolutionConfig& cfg,
                                 std::uint64_t seed, int height, int width) {
  if (gamma_grid.size() < 2) throw ParameterError("auto_resolution: need at least two gamma candidates");
  if (samples.empty()) throw ParameterError("auto_resolution: need at least one sample");
  std::vector<LabelMap> views;
  views.reserve(samples.size());
  std::vector<std::size_t> informative;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    views.push_back(clipped(samples[i], height, width));
    if (has_foreground(views.back())) informative.push_back(i);
  }
  if (informative.empty()) throw ParameterError("auto_resolution: every sample is all background");

  const auto pixels = static_cast<std::size_t>(height) * static_cast<std::size_t>(width);
  ResolutionChoice best;
  best.gamma = -1.0;
  double best_score = -1.0;
  for (double gamma : gamma_grid) {
    ResolutionConfig c = cfg;
    c.gamma = gamma;
    auto labels = detect_communities(graph, c, seed, pixels);
    const LabelMap full = labels.to_label_map(height, width);
    double score = 0.0;
    for (std::size_t i : informative) score += foreground_nmi(crop_labels(full, samples[i]), views[i]);
    score /= static_cast<double>(informative.size());
    best.scores.push_back(score);
    if (score > best_score || (score == best_score && gamma < best.gamma)) {
      best_score = score;
      best.gamma = gamma;
      best.labels = std::move(labels);
    }
  }
  return best;
}

void ConsensusConfig::validate() const {
  if (window_px <= 0 || stride_px <= 0 || stride_px > window_px)
    throw ParameterError("ConsensusConfig: need 0 < stride <= window");
  if (n_post <= 0) throw ParameterError("ConsensusConfig: n_post must be positive");
  if (!(foreground_threshold >= 0.0 && foreground_threshold <= 1.0))
    throw ParameterError("ConsensusConfig: foreground_threshold must lie in [0, 1]");
  if (max_workers < 0) throw ParameterError("ConsensusConfig: max_workers must be >= 0");
  resolution.validate();
  if (!gamma_grid.empty() && gamma_grid.size() < 2)
    throw ParameterError("ConsensusConfig: an automatic gamma grid needs at least two candidates");
  for (double g : gamma_grid)
    if (!(g > 0.0)) throw ParameterError("ConsensusConfig: gamma candidates must be positive");
}

ConsensusResult consensus_segment(int height, int width, const WindowSampler& sampler, const ConsensusConfig& cfg,
                                  std::uint64_t seed) {
  cfg.validate();
  const TilePlan tiles = tile_plan(height, width, cfg.window_px, cfg.stride_px);
  const auto& plan = tiles.plan;
  const std::size_t n_windows = plan.windows.size();
  const bool automatic = !cfg.gamma_grid.empty();

  std::size_t workers = worker_count();
  if (cfg.max_workers > 0) workers = std::min(workers, static_cast<std::size_t>(cfg.max_workers));
  workers = std::max<std::size_t>(1, std::min(workers, n_windows));

  // One accumulator per worker slot; fixed-point sums make the result
  // independent of which slot saw which window.
  std::vector<EdgeAccumulator> parts(workers, EdgeAccumulator(plan, cfg.resolution));
  const bool keep_views = automatic || cfg.score;
  std::vector<std::vector<SampleView>> views(keep_views ? n_windows : 0);
  parallel_for(
      workers,
      [&](std::size_t slot) {
        for (std::size_t w = slot; w < n_windows; w += workers)
          for (int s = 0; s < cfg.n_post; ++s) {
            const MixingStack pi = sampler(w, s, plan);
            parts[slot].add_window(w, pi);
            if (keep_views) views[w].push_back({point_estimate(pi), plan.image_row(w), plan.image_col(w)});
          }
      },
      workers);
  for (std::size_t i = 1; i < parts.size(); ++i) parts[0].merge(parts[i]);
  EdgeList graph = parts[0].finalize(cfg.n_post);

  ConsensusResult out;
  out.edges = graph.size();
  out.gamma = cfg.resolution.gamma;
  if (graph.empty()) {
    out.labels = LabelMap(height, width, 0);
    return out;
  }
  const auto pixels = static_cast<std::size_t>(height) * static_cast<std::size_t>(width);
  std::vector<SampleView> flat;
  for (auto& v : views)
    for (auto& s : v) flat.push_back(std::move(s));
  CommunityLabels labels;
  if (automatic) {
    auto choice = auto_resolution(graph, flat, cfg.gamma_grid, cfg.resolution, seed, height, width);
    out.gamma = choice.gamma;
    out.gamma_scores = std::move(choice.scores);
    labels = std::move(choice.labels);
  } else {
    labels = detect_communities(graph, cfg.resolution, seed, pixels);
  }
  LabelMap full = labels.to_label_map(height, width);
  const Array2D<double> mass = parts[0].foreground_mass(cfg.n_post);
  for (std::size_t i = 0; i < full.size(); ++i)
    if (mass[i] < cfg.foreground_threshold) full[i] = 0;
  out.labels = relabel_sequential(full);
  out.communities = count_segments(out.labels, 1);
  if (cfg.score) out.score = sample_agreement(out.labels, flat);
  if (cfg.keep_graph) out.graph = std::move(graph);
  return out;
}

LabelMap disjoint_point_estimate(int height, int width, int window_px, const WindowSampler& sampler) {
  const TilePlan tiles = tile_plan(height, width, window_px, window_px);
  const auto& plan = tiles.plan;
  LabelMap out(height, width, 0);
  std::int32_t next = 0;
  for (std::size_t w = 0; w < plan.windows.size(); ++w) {
    const LabelMap local = point_estimate(sampler(w, 0, plan));
    const int row0 = plan.image_row(w);
    const int col0 = plan.image_col(w);
    std::vector<std::int32_t> remap;
    for (int y = 0; y < local.rows(); ++y)
      for (int x = 0; x < local.cols(); ++x) {
        const auto k = local(y, x);
        if (k == 0 || !out.contains(row0 + y, col0 + x)) continue;
        if (remap.size() <= static_cast<std::size_t>(k)) remap.resize(static_cast<std::size_t>(k) + 1, 0);
        if (remap[k] == 0) remap[k] = ++next;
        out(row0 + y, col0 + x) = remap[k];
      }
  }
  return out;
}

}  // namespace segstitch

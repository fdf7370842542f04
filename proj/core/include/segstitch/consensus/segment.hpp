#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "segstitch/consensus/community.hpp"

namespace segstitch {

/// A labeling of a sub-rectangle of the image, placed at (row0, col0) in image
/// coordinates. Pixels outside the image are ignored.
struct SampleView {
  LabelMap labels;
  int row0 = 0;
  int col0 = 0;
};

/// Mean foreground NMI between a full-image labeling and each sample that has
/// any foreground, both restricted to the sample's on-image pixels. 0 when no
/// sample qualifies.
double sample_agreement(const LabelMap& labels, std::span<const SampleView> samples);

struct ResolutionChoice {
  double gamma = 0.0;
  CommunityLabels labels;
  std::vector<double> scores;  // per candidate, same order as the grid
};

/// Sweeps the grid and keeps the gamma whose consensus best agrees with the
/// samples: mean foreground NMI over samples, ties to the smaller gamma.
/// Throws ParameterError with fewer than two candidates, no samples, or when
/// every sample is all background.
ResolutionChoice auto_resolution(const EdgeList& graph, std::span<const SampleView> samples,
                                 std::span<const double> gamma_grid, const ResolutionConfig& cfg,
                                 std::uint64_t seed, int height, int width);

struct ConsensusConfig {
  int window_px = 80;
  int stride_px = 20;
  int n_post = 8;
  ResolutionConfig resolution;
  /// Pixels whose mean foreground mass over all window samples falls below
  /// this are labeled background after community detection.
  double foreground_threshold = 0.5;
  /// Non-empty selects gamma automatically from these candidates.
  std::vector<double> gamma_grid;
  /// Worker cap; 0 uses worker_count().
  int max_workers = 0;
  /// Also report sample_agreement of the final labels.
  bool score = false;
  /// Return the reduced graph in ConsensusResult::graph.
  bool keep_graph = false;

  void validate() const;
};

/// Returns the posterior sample s for window w. Called concurrently; must be
/// a pure function of its arguments.
using WindowSampler = std::function<MixingStack(std::size_t w, int s, const WindowPlan& plan)>;

struct ConsensusResult {
  LabelMap labels;
  int communities = 0;
  double gamma = 0.0;
  std::size_t edges = 0;
  std::vector<double> gamma_scores;
  double score = 0.0;  // set when ConsensusConfig::score is on
  EdgeList graph;      // set when ConsensusConfig::keep_graph is on
};

/// Tiles the image, reduces all (window, sample) edges into one graph, and
/// labels it. A graph without edges yields an all-background result.
ConsensusResult consensus_segment(int height, int width, const WindowSampler& sampler, const ConsensusConfig& cfg,
                                  std::uint64_t seed);

/// Disjoint windows with one point estimate each; labels are unique per
/// (window, instance). This is the baseline the consensus improves on.
LabelMap disjoint_point_estimate(int height, int width, int window_px, const WindowSampler& sampler);

}  // namespace segstitch

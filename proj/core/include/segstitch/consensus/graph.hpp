#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "segstitch/consensus/tiling.hpp"
#include "segstitch/scene.hpp"

namespace segstitch {

struct Edge {
  std::uint32_t i = 0;  // i < j
  std::uint32_t j = 0;
  double w = 0.0;

  friend bool operator==(const Edge&, const Edge&) = default;
};

using EdgeList = std::vector<Edge>;

inline constexpr double kDefaultEdgeMin = 0.01;

enum class Objective { cpm, rb };

struct ResolutionConfig {
  Objective objective = Objective::cpm;
  double gamma = 0.01;
  double d_c = 5.0;
  double e_min = kDefaultEdgeMin;
  /// Independent optimization runs; the best-quality partition wins.
  int restarts = 3;

  void validate() const;
};

struct Displacement {
  int dy = 0;
  int dx = 0;
};

/// One representative of each antipodal pair with |d| < d_c: dy > 0, or dy == 0
/// and dx > 0. Ordered by (dy, dx).
std::vector<Displacement> half_plane_displacements(double d_c);

/// Same-objectness edges of one window and one posterior sample. idx holds the
/// window's global pixel ids (-1 for padding); pixels outside the window are
/// treated as background.
EdgeList window_edges(const MixingStack& pi, const IndexMatrix& idx, const ResolutionConfig& cfg);

/// Sums duplicate (i, j) weights across parts and divides by n_post. Output is
/// sorted by (i, j); the sum runs over weights in sorted order, so the result
/// is bit-identical for any ordering of the parts.
EdgeList merge_edges(std::span<const EdgeList> parts, int n_post);

/// Per-pixel argmax over pi_0..pi_K, ties to the lowest index.
LabelMap point_estimate(const MixingStack& pi);

/// Streaming reducer for the overlapping-window graph. Contributions are keyed
/// by (pixel, displacement) so no intermediate edge lists are materialized.
class EdgeAccumulator {
 public:
  EdgeAccumulator(const WindowPlan& plan, const ResolutionConfig& cfg);

  /// Adds window w's edges for one sample.
  void add_window(std::size_t w, const MixingStack& pi);
  /// Elementwise sum; both sides must share plan and config.
  void merge(const EdgeAccumulator& other);
  /// Averages each pair over n_post samples and the windows that saw both pixels.
  EdgeList finalize(int n_post) const;
  /// Mean of 1 - pi_0 per image pixel over every window and sample that saw it.
  Array2D<double> foreground_mass(int n_post) const;

 private:
  WindowPlan plan_;
  ResolutionConfig cfg_;
  std::vector<Displacement> disp_;
  std::vector<std::int64_t> sum_;  // fixed point, pixel-major, one slot per displacement
  std::vector<std::int64_t> mass_;  // fixed point, per pixel
};

}  // namespace segstitch

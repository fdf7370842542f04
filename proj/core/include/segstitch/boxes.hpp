#pragma once

#include <array>
#include <cstddef>
#include <limits>
#include <vector>

#include "segstitch/grid.hpp"

namespace segstitch {

/// Affine map followed by a sigmoid taking a box latent to unit offsets
/// (t_x, t_y, t_w, t_h).
struct SafParams {
  std::array<double, 4> bias{};
  std::array<std::array<double, 4>, 4> weight{};

  /// bias = 0, weight = identity.
  static SafParams identity();
};

using BoxLatent = std::array<double, 4>;

/// Axis-aligned box in pixels, center + size convention.
struct BoundingBox {
  double cx = 0.0;
  double cy = 0.0;
  double w = 0.0;
  double h = 0.0;

  double x0() const noexcept { return cx - 0.5 * w; }
  double y0() const noexcept { return cy - 0.5 * h; }
  double x1() const noexcept { return cx + 0.5 * w; }
  double y1() const noexcept { return cy + 0.5 * h; }
  double area() const noexcept { return w * h; }

  friend bool operator==(const BoundingBox&, const BoundingBox&) = default;
};

struct GridIndex {
  int ix = 0;  // column on the coarse grid
  int iy = 0;  // row on the coarse grid
};

/// sigmoid(bias + weight * v) as the four unit offsets.
std::array<double, 4> saf_offsets(const BoxLatent& v, const SafParams& params);

/// Places a box for coarse cell (ix, iy):
///   cx = (W / W~)(ix + t_x), cy = (H / H~)(iy + t_y),
///   w  = min_obj + (max_obj - min_obj) t_w, h likewise.
BoundingBox saf_transform(const BoxLatent& v, const SafParams& params, GridIndex index,
                          const GridSpec& grid);

/// Box from explicit unit offsets (the second half of saf_transform).
BoundingBox box_from_offsets(const std::array<double, 4>& t, GridIndex index, const GridSpec& grid);

struct Overlap {
  double iomin = 0.0;  // intersection / min(area_a, area_b)
  double iou = 0.0;    // intersection / union
};

Overlap overlap(const BoundingBox& a, const BoundingBox& b);

/// One box proposal per coarse cell, flattened row-major, together with the
/// proposal probabilities and the provisional presence field.
struct ProposalSet {
  std::vector<BoundingBox> boxes;
  ProbField probs;
  BinaryField provisional;

  /// Throws DimensionError when the three parts disagree in size.
  void validate() const;
};

inline constexpr double kNmsAlphaTrain = 0.3;
inline constexpr double kNmsAlphaTest = 0.5;

/// Greedy NMS on scores s = provisional + probs. A proposal survives iff its
/// IoMIN with every higher-scored survivor is <= alpha; equal scores are
/// broken toward the lower flattened index. Returns provisional AND survived.
BinaryField nms(const ProposalSet& proposals, double alpha);

/// Scores s = provisional + probs used by nms and select_top_k.
Array2D<double> proposal_scores(const ProposalSet& proposals);

inline constexpr std::size_t kNoProposal = std::numeric_limits<std::size_t>::max();

struct TopK {
  std::vector<std::size_t> indices;        // flattened coarse indices, kNoProposal if the grid ran out
  std::vector<std::uint8_t> mask_coeffs;   // c_j in {0, 1}
};

inline constexpr int kMaxInstancesDigits = 10;
inline constexpr int kMaxInstancesNuclei = 25;

/// Exactly k_max slots in descending score order. Cells with c = 1 come first
/// (coefficient 1); any remaining slots are filled by the best-scoring cells
/// with c = 0 and carry coefficient 0 so their mixing weights vanish.
TopK select_top_k(const BinaryField& c, const Array2D<double>& scores, int k_max);

}  // namespace segstitch

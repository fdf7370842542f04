#include "segstitch/boxes.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace segstitch {

namespace {

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

// Descending score, ties to the lower index.
std::vector<std::size_t> score_order(const Array2D<double>& scores) {
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  return order;
}

}  // namespace

SafParams SafParams::identity() {
  SafParams p;
  for (int i = 0; i < 4; ++i) p.weight[i][i] = 1.0;
  return p;
}

std::array<double, 4> saf_offsets(const BoxLatent& v, const SafParams& params) {
  std::array<double, 4> t{};
  for (int i = 0; i < 4; ++i) {
    double a = params.bias[i];
    for (int j = 0; j < 4; ++j) a += params.weight[i][j] * v[j];
    t[i] = sigmoid(a);
  }
  return t;
}

BoundingBox box_from_offsets(const std::array<double, 4>& t, GridIndex index, const GridSpec& grid) {
  if (index.ix < 0 || index.iy < 0 || index.ix >= grid.coarse_w() || index.iy >= grid.coarse_h())
    throw ParameterError("saf_transform: grid index outside the coarse grid");
  const double cell_w = static_cast<double>(grid.width_px()) / grid.coarse_w();
  const double cell_h = static_cast<double>(grid.height_px()) / grid.coarse_h();
  const double span = grid.max_obj_px() - grid.min_obj_px();
  BoundingBox b;
  b.cx = cell_w * (index.ix + t[0]);
  b.cy = cell_h * (index.iy + t[1]);
  b.w = grid.min_obj_px() + span * t[2];
  b.h = grid.min_obj_px() + span * t[3];
  return b;
}

BoundingBox saf_transform(const BoxLatent& v, const SafParams& params, GridIndex index,
                          const GridSpec& grid) {
  return box_from_offsets(saf_offsets(v, params), index, grid);
}

Overlap overlap(const BoundingBox& a, const BoundingBox& b) {
  if (!(a.w > 0.0 && a.h > 0.0 && b.w > 0.0 && b.h > 0.0))
    throw ParameterError("overlap: boxes must have positive width and height");
  const double ix = std::max(0.0, std::min(a.x1(), b.x1()) - std::max(a.x0(), b.x0()));
  const double iy = std::max(0.0, std::min(a.y1(), b.y1()) - std::max(a.y0(), b.y0()));
  const double inter = ix * iy;
  const double area_a = a.area();
  const double area_b = b.area();
  Overlap o;
  o.iomin = std::min(1.0, inter / std::min(area_a, area_b));
  o.iou = std::min(o.iomin, inter / (area_a + area_b - inter));
  return o;
}

void ProposalSet::validate() const {
  if (!probs.same_shape(provisional) || boxes.size() != probs.size())
    throw DimensionError("ProposalSet: boxes, probs and provisional must cover the same grid");
}

Array2D<double> proposal_scores(const ProposalSet& proposals) {
  proposals.validate();
  Array2D<double> s(proposals.probs.rows(), proposals.probs.cols());
  for (std::size_t i = 0; i < s.size(); ++i)
    s[i] = static_cast<double>(proposals.provisional[i] != 0) + proposals.probs[i];
  return s;
}

BinaryField nms(const ProposalSet& proposals, double alpha) {
  if (!(alpha > 0.0 && alpha <= 1.0)) throw ParameterError("nms: alpha must lie in (0, 1]");
  const auto scores = proposal_scores(proposals);
  const auto order = score_order(scores);

  BinaryField out(proposals.probs.rows(), proposals.probs.cols());
  std::vector<std::size_t> survivors;
  survivors.reserve(order.size());
  for (std::size_t i : order) {
    const auto& box = proposals.boxes[i];
    const bool keep = std::none_of(survivors.begin(), survivors.end(), [&](std::size_t s) {
      return overlap(box, proposals.boxes[s]).iomin > alpha;
    });
    if (!keep) continue;
    survivors.push_back(i);
    if (proposals.provisional[i] != 0) out[i] = 1;
  }
  return out;
}

TopK select_top_k(const BinaryField& c, const Array2D<double>& scores, int k_max) {
  if (k_max < 1) throw ParameterError("select_top_k: k_max must be >= 1");
  if (!c.same_shape(scores)) throw DimensionError("select_top_k: field and scores differ in shape");

  const auto order = score_order(scores);
  TopK out;
  out.indices.reserve(static_cast<std::size_t>(k_max));
  out.mask_coeffs.reserve(static_cast<std::size_t>(k_max));
  const auto k = static_cast<std::size_t>(k_max);
  for (std::size_t i : order) {
    if (out.indices.size() == k) break;
    if (c[i] != 0) {
      out.indices.push_back(i);
      out.mask_coeffs.push_back(1);
    }
  }
  for (std::size_t i : order) {
    if (out.indices.size() == k) break;
    if (c[i] == 0) {
      out.indices.push_back(i);
      out.mask_coeffs.push_back(0);
    }
  }
  while (out.indices.size() < k) {
    out.indices.push_back(kNoProposal);
    out.mask_coeffs.push_back(0);
  }
  return out;
}

}  // namespace segstitch

#include "segstitch/grid.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace segstitch {

namespace {

int ceil_div(int a, int b) { return (a + b - 1) / b; }

}  // namespace

GridSpec::GridSpec(int height_px, int width_px, int min_obj_px, int max_obj_px)
    : height_px_(height_px), width_px_(width_px), min_obj_px_(min_obj_px), max_obj_px_(max_obj_px) {
  if (height_px <= 0 || width_px <= 0)
    throw ParameterError("GridSpec: image dimensions must be positive");
  if (min_obj_px <= 0 || min_obj_px > max_obj_px || max_obj_px > std::min(height_px, width_px))
    throw ParameterError("GridSpec: need 0 < min_obj <= max_obj <= min(H, W), got min_obj=" +
                         std::to_string(min_obj_px) + " max_obj=" + std::to_string(max_obj_px));
  coarse_h_ = ceil_div(height_px, min_obj_px);
  coarse_w_ = ceil_div(width_px, min_obj_px);
}

int BinaryField::cardinality() const noexcept {
  return std::accumulate(values().begin(), values().end(), 0,
                         [](int acc, std::uint8_t v) { return acc + (v != 0 ? 1 : 0); });
}

ProbField::ProbField(int rows, int cols, double fill) : Array2D<double>(rows, cols, fill) {}

void ProbField::validate() const {
  for (double v : values()) {
    if (std::isnan(v)) throw ParameterError("ProbField: NaN entry");
    if (v < 0.0 || v > 1.0) throw ParameterError("ProbField: entry outside [0, 1]");
  }
}

}  // namespace segstitch

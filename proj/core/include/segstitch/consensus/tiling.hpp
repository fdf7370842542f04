#pragma once

#include <cstdint>
#include <vector>

#include "segstitch/array.hpp"

namespace segstitch {

struct WindowOrigin {
  int row = 0;  // on the padded canvas
  int col = 0;
};

/// Sliding-window layout over an H x W image. The canvas is padded by
/// window - stride on the top and left and by at least that much on the bottom
/// and right, so every image pixel is seen by the same number of windows.
struct WindowPlan {
  int height = 0;  // unpadded
  int width = 0;
  int window_px = 0;
  int stride_px = 0;
  int pad_top = 0;
  int pad_left = 0;
  int pad_bottom = 0;
  int pad_right = 0;
  int rows = 0;  // window rows
  int cols = 0;  // window columns
  std::vector<WindowOrigin> windows;  // row-major

  int padded_height() const noexcept { return pad_top + height + pad_bottom; }
  int padded_width() const noexcept { return pad_left + width + pad_right; }
  /// Windows covering image pixel (y, x).
  int multiplicity(int y, int x) const noexcept;
  /// Windows covering both image pixels.
  int pair_multiplicity(int y0, int x0, int y1, int x1) const noexcept;
  /// Top-left of window w in image coordinates (may be negative).
  int image_row(std::size_t w) const noexcept { return windows[w].row - pad_top; }
  int image_col(std::size_t w) const noexcept { return windows[w].col - pad_left; }
};

/// Padded-canvas pixel ids: interior numbered row-major 0..H*W-1, padding -1.
using IndexMatrix = Array2D<std::int32_t>;

struct TilePlan {
  WindowPlan plan;
  IndexMatrix index;
};

/// Throws ParameterError unless 0 < stride <= window and the image is non-empty.
TilePlan tile_plan(int height, int width, int window_px, int stride_px);

/// Mirror padding without edge repetition, folded for pads wider than the image.
Image reflect_pad(const Image& image, int top, int left, int bottom, int right);
Image pad_for_plan(const Image& image, const WindowPlan& plan);

/// window_px x window_px crop of the index matrix at window w.
IndexMatrix window_index(const TilePlan& tiles, std::size_t w);

}  // namespace segstitch

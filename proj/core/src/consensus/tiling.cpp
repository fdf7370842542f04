#include "segstitch/consensus/tiling.hpp"

#include <algorithm>

#include "segstitch/error.hpp"

namespace segstitch {

namespace {

// Origins o = k * stride in [0, last] with o <= lo and o + window > hi.
int axis_count(int lo, int hi, int window, int stride, int last) {
  const int from = std::max(0, hi - window + 1);
  const int to = std::min(lo, last);
  if (to < from) return 0;
  const int first_k = (from + stride - 1) / stride;
  const int last_k = to / stride;
  return std::max(0, last_k - first_k + 1);
}

int reflect(int i, int n) {
  if (n == 1) return 0;
  const int period = 2 * (n - 1);
  int m = i % period;
  if (m < 0) m += period;
  return m < n ? m : period - m;
}

}  // namespace

int WindowPlan::multiplicity(int y, int x) const noexcept { return pair_multiplicity(y, x, y, x); }

int WindowPlan::pair_multiplicity(int y0, int x0, int y1, int x1) const noexcept {
  const int last_row = (rows - 1) * stride_px;
  const int last_col = (cols - 1) * stride_px;
  const int ry = axis_count(std::min(y0, y1) + pad_top, std::max(y0, y1) + pad_top, window_px, stride_px, last_row);
  const int rx = axis_count(std::min(x0, x1) + pad_left, std::max(x0, x1) + pad_left, window_px, stride_px, last_col);
  return ry * rx;
}

TilePlan tile_plan(int height, int width, int window_px, int stride_px) {
  if (height <= 0 || width <= 0) throw ParameterError("tile_plan: image dims must be positive");
  if (window_px <= 0 || stride_px <= 0) throw ParameterError("tile_plan: window and stride must be positive");
  if (stride_px > window_px) throw ParameterError("tile_plan: stride must not exceed the window");

  WindowPlan p;
  p.height = height;
  p.width = width;
  p.window_px = window_px;
  p.stride_px = stride_px;
  p.pad_top = p.pad_left = window_px - stride_px;

  // The last origin must reach the last pixel's own lattice position so the
  // bottom/right rows get as many windows as the top/left ones.
  const int last_row = (height - 1 + p.pad_top) / stride_px * stride_px;
  const int last_col = (width - 1 + p.pad_left) / stride_px * stride_px;
  p.pad_bottom = last_row + window_px - height - p.pad_top;
  p.pad_right = last_col + window_px - width - p.pad_left;
  p.rows = last_row / stride_px + 1;
  p.cols = last_col / stride_px + 1;
  p.windows.reserve(static_cast<std::size_t>(p.rows) * p.cols);
  for (int r = 0; r < p.rows; ++r)
    for (int c = 0; c < p.cols; ++c) p.windows.push_back({r * stride_px, c * stride_px});

  IndexMatrix idx(p.padded_height(), p.padded_width(), -1);
  for (int y = 0; y < height; ++y)
    for (int x = 0; x < width; ++x) idx(y + p.pad_top, x + p.pad_left) = y * width + x;
  return {std::move(p), std::move(idx)};
}

Image reflect_pad(const Image& image, int top, int left, int bottom, int right) {
  if (top < 0 || left < 0 || bottom < 0 || right < 0) throw ParameterError("reflect_pad: negative pad");
  if (image.height() == 0 || image.width() == 0) throw DimensionError("reflect_pad: empty image");
  Image out(image.height() + top + bottom, image.width() + left + right, image.channels());
  for (int y = 0; y < out.height(); ++y) {
    const int sy = reflect(y - top, image.height());
    for (int x = 0; x < out.width(); ++x) {
      const int sx = reflect(x - left, image.width());
      for (int ch = 0; ch < image.channels(); ++ch) out(y, x, ch) = image(sy, sx, ch);
    }
  }
  return out;
}

Image pad_for_plan(const Image& image, const WindowPlan& plan) {
  if (image.height() != plan.height || image.width() != plan.width)
    throw DimensionError("pad_for_plan: image does not match the plan");
  return reflect_pad(image, plan.pad_top, plan.pad_left, plan.pad_bottom, plan.pad_right);
}

IndexMatrix window_index(const TilePlan& tiles, std::size_t w) {
  if (w >= tiles.plan.windows.size()) throw ParameterError("window_index: window out of range");
  const auto o = tiles.plan.windows[w];
  const int n = tiles.plan.window_px;
  IndexMatrix out(n, n, -1);
  for (int y = 0; y < n; ++y)
    for (int x = 0; x < n; ++x) out(y, x) = tiles.index(o.row + y, o.col + x);
  return out;
}

}  // namespace segstitch

#include <algorithm>
#include <cmath>
#include <numbers>

#include "segstitch/scene.hpp"

namespace segstitch {

namespace {

constexpr int kPositivityProbes = 3600;

// Zero-padded bilinear read at fractional (row, col) in pixel-index units.
template <typename Read>
double bilinear(int height, int width, double row, double col, Read&& read) {
  const double r0f = std::floor(row);
  const double c0f = std::floor(col);
  const int r0 = static_cast<int>(r0f);
  const int c0 = static_cast<int>(c0f);
  const double fr = row - r0f;
  const double fc = col - c0f;
  auto at = [&](int r, int c) {
    return (r < 0 || c < 0 || r >= height || c >= width) ? 0.0 : read(r, c);
  };
  double v = 0.0;
  if (fr < 1.0 && fc < 1.0) v += (1.0 - fr) * (1.0 - fc) * at(r0, c0);
  if (fc > 0.0) v += (1.0 - fr) * fc * at(r0, c0 + 1);
  if (fr > 0.0) v += fr * (1.0 - fc) * at(r0 + 1, c0);
  if (fr > 0.0 && fc > 0.0) v += fr * fc * at(r0 + 1, c0 + 1);
  return v;
}

struct PixelRange {
  int lo = 0;
  int hi = 0;  // exclusive
};

// Canvas pixels whose centers lie in [a, b).
PixelRange centers_within(double a, double b, int extent) {
  PixelRange r;
  r.lo = std::clamp(static_cast<int>(std::ceil(a - 0.5)), 0, extent);
  r.hi = std::clamp(static_cast<int>(std::ceil(b - 0.5)), 0, extent);
  return r;
}

}  // namespace

double blob_radius(const FourierBlobParams& params, double theta) {
  double r = params.mean_radius;
  for (std::size_t i = 0; i < params.harmonics.size(); ++i) {
    const auto& h = params.harmonics[i];
    r += h.amplitude * std::cos(static_cast<double>(i + 1) * theta + h.phase);
  }
  return r;
}

Raster render_blob(const FourierBlobParams& params, int height, int width, int channels) {
  if (height <= 0 || width <= 0) throw DimensionError("render_blob: raster must be non-empty");
  if (!(params.mean_radius > 0.0)) throw ParameterError("render_blob: mean radius must be positive");
  for (int i = 0; i < kPositivityProbes; ++i) {
    const double theta = 2.0 * std::numbers::pi * i / kPositivityProbes;
    if (!(blob_radius(params, theta) > 0.0))
      throw ParameterError("render_blob: radial function is not positive for every angle");
  }

  Raster out{Image(height, width, channels), Array2D<double>(height, width, 0.0)};
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      const double dx = x + 0.5 - params.origin_x;
      const double dy = y + 0.5 - params.origin_y;
      const double rho = std::hypot(dx, dy);
      if (rho > blob_radius(params, std::atan2(dy, dx))) continue;
      out.weights(y, x) = kWeightCeiling;
      for (int ch = 0; ch < channels; ++ch) out.appearance(y, x, ch) = params.intensity;
    }
  }
  return out;
}

Image render_background(const BackgroundSpec& bg, int height, int width, int channels) {
  Image img(height, width, channels, bg.level);
  if (bg.kind == BackgroundKind::flat) return img;

  if (!(bg.spacing_px >= 2.0)) throw ParameterError("render_background: grid spacing must be >= 2 px");
  if (std::find(kGridAnglesDeg.begin(), kGridAnglesDeg.end(), bg.angle_deg) == kGridAnglesDeg.end())
    throw ParameterError("render_background: angle must be one of 0, 45, 90, 135 degrees");
  if (!(bg.line_width_px > 0.0 && bg.line_width_px < bg.spacing_px))
    throw ParameterError("render_background: line width must lie in (0, spacing)");

  const double a = bg.angle_deg * std::numbers::pi / 180.0;
  // Exact unit vectors for the axis-aligned angles keep periods exact.
  const double ca = bg.angle_deg == 90.0 ? 0.0 : std::cos(a);
  const double sa = bg.angle_deg == 0.0 ? 0.0 : std::sin(a);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      const double u = x * ca + y * sa + bg.phase_px;
      const double m = u - bg.spacing_px * std::floor(u / bg.spacing_px);
      if (m < bg.line_width_px)
        for (int ch = 0; ch < channels; ++ch) img(y, x, ch) += bg.contrast;
    }
  }
  return img;
}

Layer paste(const Raster& raster, const BoundingBox& box, int height, int width) {
  if (!(box.w > 0.0 && box.h > 0.0)) throw ParameterError("paste: box must have positive size");
  const int rh = raster.weights.rows();
  const int rw = raster.weights.cols();
  if (raster.appearance.height() != rh || raster.appearance.width() != rw)
    throw DimensionError("paste: appearance and weights differ in shape");

  Layer layer{Image(height, width, raster.appearance.channels()), Array2D<double>(height, width, 0.0), box};
  const auto rows = centers_within(box.y0(), box.y1(), height);
  const auto cols = centers_within(box.x0(), box.x1(), width);
  const double sy = rh / box.h;
  const double sx = rw / box.w;
  for (int y = rows.lo; y < rows.hi; ++y) {
    const double v = (y + 0.5 - box.y0()) * sy - 0.5;
    for (int x = cols.lo; x < cols.hi; ++x) {
      const double u = (x + 0.5 - box.x0()) * sx - 0.5;
      layer.weights(y, x) = std::min(
          kWeightCeiling, bilinear(rh, rw, v, u, [&](int r, int c) { return raster.weights(r, c); }));
      for (int ch = 0; ch < raster.appearance.channels(); ++ch)
        layer.appearance(y, x, ch) =
            bilinear(rh, rw, v, u, [&](int r, int c) { return raster.appearance(r, c, ch); });
    }
  }
  return layer;
}

Image crop(const Image& image, const BoundingBox& box, int out_h, int out_w) {
  if (!(box.w > 0.0 && box.h > 0.0)) throw ParameterError("crop: box must have positive size");
  Image out(out_h, out_w, image.channels());
  const double sy = box.h / out_h;
  const double sx = box.w / out_w;
  for (int a = 0; a < out_h; ++a) {
    const double row = box.y0() + (a + 0.5) * sy - 0.5;
    for (int b = 0; b < out_w; ++b) {
      const double col = box.x0() + (b + 0.5) * sx - 0.5;
      for (int ch = 0; ch < image.channels(); ++ch)
        out(a, b, ch) = bilinear(image.height(), image.width(), row, col,
                                 [&](int r, int c) { return image(r, c, ch); });
    }
  }
  return out;
}

Array2D<double> crop(const Array2D<double>& plane, const BoundingBox& box, int out_h, int out_w) {
  if (!(box.w > 0.0 && box.h > 0.0)) throw ParameterError("crop: box must have positive size");
  Array2D<double> out(out_h, out_w, 0.0);
  const double sy = box.h / out_h;
  const double sx = box.w / out_w;
  for (int a = 0; a < out_h; ++a) {
    const double row = box.y0() + (a + 0.5) * sy - 0.5;
    for (int b = 0; b < out_w; ++b) {
      const double col = box.x0() + (b + 0.5) * sx - 0.5;
      out(a, b) = bilinear(plane.rows(), plane.cols(), row, col, [&](int r, int c) { return plane(r, c); });
    }
  }
  return out;
}

}  // namespace segstitch

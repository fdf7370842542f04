#include <algorithm>
#include <cmath>
#include <sstream>

#include "segstitch/scene.hpp"

namespace segstitch {

MixingStack::MixingStack(int instances, int height, int width)
    : instances_(instances), height_(height), width_(width) {
  if (instances < 0 || height < 0 || width < 0) throw DimensionError("MixingStack: negative extent");
  data_.assign(static_cast<std::size_t>(instances + 1) * pixels(), 0.0);
  std::fill_n(data_.begin(), pixels(), 1.0);
}

void MixingStack::validate(double tol) const {
  if (data_.size() != static_cast<std::size_t>(instances_ + 1) * pixels())
    throw DimensionError("MixingStack: storage does not match extents");
  for (std::size_t p = 0; p < pixels(); ++p) {
    double sum = 0.0;
    for (int k = 0; k <= instances_; ++k) {
      const double v = data_[static_cast<std::size_t>(k) * pixels() + p];
      if (!(v >= -tol)) {
        std::ostringstream os;
        os << "MixingStack: negative or NaN entry " << v << " at plane " << k << ", pixel " << p;
        throw ParameterError(os.str());
      }
      sum += v;
    }
    if (std::abs(sum - 1.0) > tol) {
      std::ostringstream os;
      os << "MixingStack: column " << p << " sums to " << sum;
      throw ParameterError(os.str());
    }
  }
}

namespace {

MixingStack normalize_planes(std::span<const Array2D<double>> planes, int height, int width,
                             double rescale_above) {
  const int k_count = static_cast<int>(planes.size());
  MixingStack pi(k_count, height, width);
  const std::size_t n = pi.pixels();
  for (const auto& w : planes)
    if (w.rows() != height || w.cols() != width) throw DimensionError("mix: weight plane has wrong shape");

  for (std::size_t p = 0; p < n; ++p) {
    double total = 0.0;
    for (const auto& w : planes) total += w[p];
    const double denom = total > rescale_above ? total : 1.0;
    double fg = 0.0;
    for (int k = 0; k < k_count; ++k) {
      const double v = planes[static_cast<std::size_t>(k)][p] / denom;
      pi.plane(k + 1)[p] = v;
      fg += v;
    }
    pi.plane(0)[p] = std::max(0.0, 1.0 - fg);
  }
  return pi;
}

}  // namespace

MixingStack mix(std::span<const Array2D<double>> weights, int height, int width) {
  for (const auto& w : weights)
    for (double v : w.values())
      if (!(v >= 0.0 && v < 1.0)) throw ParameterError("mix: weights must lie in [0, 1)");
  return normalize_planes(weights, height, width, 1.0);
}

MixingStack mix(std::span<const Layer> layers, int height, int width) {
  std::vector<Array2D<double>> planes;
  planes.reserve(layers.size());
  for (const auto& l : layers) planes.push_back(l.weights);
  return mix(std::span<const Array2D<double>>(planes), height, width);
}

MixingStack stack_from_planes(std::span<const Array2D<double>> planes, int height, int width) {
  for (const auto& w : planes)
    for (double v : w.values())
      if (!(v >= 0.0)) throw ParameterError("stack_from_planes: planes must be non-negative");
  return normalize_planes(planes, height, width, 1.0 + 1e-9);
}

LabelMap sample_mask(const MixingStack& pi, Rng& rng) {
  LabelMap m(pi.height(), pi.width(), 0);
  const std::size_t n = pi.pixels();
  for (std::size_t p = 0; p < n; ++p) {
    double u = uniform01(rng);
    int label = pi.instances();
    for (int k = 0; k <= pi.instances(); ++k) {
      u -= pi.plane(k)[p];
      if (u < 0.0) {
        label = k;
        break;
      }
    }
    // Rounding can leave u >= 0 after the last plane; fall back to the last
    // plane with positive mass.
    while (label > 0 && pi.plane(label)[p] <= 0.0) --label;
    m[p] = label;
  }
  return m;
}

Image compose(const LabelMap& mask, const Image& background, std::span<const Layer> layers,
              double sigma, Rng& rng) {
  if (!(sigma >= 0.0)) throw ParameterError("compose: sigma must be non-negative");
  if (mask.rows() != background.height() || mask.cols() != background.width())
    throw DimensionError("compose: mask and background differ in shape");
  for (const auto& l : layers)
    if (!l.appearance.same_shape(background)) throw DimensionError("compose: layer shape mismatch");

  Image x(background.height(), background.width(), background.channels());
  for (int y = 0; y < x.height(); ++y) {
    for (int c = 0; c < x.width(); ++c) {
      const int k = mask(y, c);
      if (k < 0 || k > static_cast<int>(layers.size())) throw DimensionError("compose: label out of range");
      for (int ch = 0; ch < x.channels(); ++ch) {
        const double mean = k == 0 ? background(y, c, ch) : layers[static_cast<std::size_t>(k - 1)].appearance(y, c, ch);
        x(y, c, ch) = sigma > 0.0 ? mean + sigma * standard_normal(rng) : mean;
      }
    }
  }
  return x;
}

}  // namespace segstitch

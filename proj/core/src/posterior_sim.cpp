#include <algorithm>
#include <cmath>
#include <numbers>

#include "segstitch/scene.hpp"

namespace segstitch {

namespace {

using Plane = Array2D<double>;
using Patch = PosteriorSimulator::Patch;

bool has_mass(const Patch& p) {
  return std::any_of(p.data.values().begin(), p.data.values().end(), [](double v) { return v > 0.0; });
}

// Shrinks to the bounding box of positive entries; empty data when none.
Patch tighten(const Patch& p) {
  int r0 = p.data.rows(), r1 = -1, c0 = p.data.cols(), c1 = -1;
  for (int y = 0; y < p.data.rows(); ++y)
    for (int x = 0; x < p.data.cols(); ++x)
      if (p.data(y, x) > 0.0) {
        r0 = std::min(r0, y);
        r1 = std::max(r1, y);
        c0 = std::min(c0, x);
        c1 = std::max(c1, x);
      }
  if (r1 < 0) return {p.y0, p.x0, Plane()};
  Patch out{p.y0 + r0, p.x0 + c0, Plane(r1 - r0 + 1, c1 - c0 + 1, 0.0)};
  for (int y = r0; y <= r1; ++y)
    for (int x = c0; x <= c1; ++x) out.data(y - r0, x - c0) = p.data(y, x);
  return out;
}

// Part of the patch inside [0, h) x [0, w).
Patch clip(const Patch& p, int h, int w) {
  const int y0 = std::max(p.y0, 0);
  const int x0 = std::max(p.x0, 0);
  const int y1 = std::min(p.y0 + p.data.rows(), h);
  const int x1 = std::min(p.x0 + p.data.cols(), w);
  if (y1 <= y0 || x1 <= x0) return {y0, x0, Plane()};
  Patch out{y0, x0, Plane(y1 - y0, x1 - x0, 0.0)};
  for (int y = y0; y < y1; ++y)
    for (int x = x0; x < x1; ++x) out.data(y - y0, x - x0) = p.data(y - p.y0, x - p.x0);
  return out;
}

// Grayscale dilation (radius > 0, max filter) or erosion (radius < 0, min
// filter) with a disk. Everything outside the patch reads as 0.
Patch morph(const Patch& in, int radius) {
  if (radius == 0) return in;
  const int r = std::abs(radius);
  const bool dilate = radius > 0;
  const int grow = dilate ? r : 0;
  Patch out{in.y0 - grow, in.x0 - grow, Plane(in.data.rows() + 2 * grow, in.data.cols() + 2 * grow, 0.0)};
  for (int y = 0; y < out.data.rows(); ++y) {
    for (int x = 0; x < out.data.cols(); ++x) {
      const int sy = y - grow;
      const int sx = x - grow;
      double acc = dilate ? 0.0 : in.data(sy, sx);
      for (int dy = -r; dy <= r && (dilate || acc > 0.0); ++dy) {
        for (int dx = -r; dx <= r; ++dx) {
          if (dx * dx + dy * dy > r * r) continue;
          const double v = in.data.contains(sy + dy, sx + dx) ? in.data(sy + dy, sx + dx) : 0.0;
          acc = dilate ? std::max(acc, v) : std::min(acc, v);
        }
      }
      out.data(y, x) = acc;
    }
  }
  return out;
}

// Splits a patch along a line through its mass centroid at a random angle.
std::pair<Patch, Patch> split(const Patch& in, Rng& rng) {
  double m = 0.0, my = 0.0, mx = 0.0;
  for (int y = 0; y < in.data.rows(); ++y)
    for (int x = 0; x < in.data.cols(); ++x) {
      const double v = in.data(y, x);
      m += v;
      my += v * (y + in.y0);
      mx += v * (x + in.x0);
    }
  const double cy = my / m;
  const double cx = mx / m;
  const double a = std::numbers::pi * uniform01(rng);
  const double ny = std::sin(a);
  const double nx = std::cos(a);
  Patch first{in.y0, in.x0, Plane(in.data.rows(), in.data.cols(), 0.0)};
  Patch second = first;
  for (int y = 0; y < in.data.rows(); ++y)
    for (int x = 0; x < in.data.cols(); ++x) {
      const double side = (y + in.y0 - cy) * ny + (x + in.x0 - cx) * nx;
      (side >= 0.0 ? first : second).data(y, x) = in.data(y, x);
    }
  return {std::move(first), std::move(second)};
}

// Same normalization as stack_from_planes, restricted to the patches' union.
MixingStack paint(const std::vector<Patch>& patches, int h, int w) {
  MixingStack pi(static_cast<int>(patches.size()), h, w);
  int y0 = h, y1 = 0, x0 = w, x1 = 0;
  for (std::size_t k = 0; k < patches.size(); ++k) {
    const auto& p = patches[k];
    for (int y = 0; y < p.data.rows(); ++y)
      for (int x = 0; x < p.data.cols(); ++x) pi.at(static_cast<int>(k) + 1, p.y0 + y, p.x0 + x) = p.data(y, x);
    y0 = std::min(y0, p.y0);
    x0 = std::min(x0, p.x0);
    y1 = std::max(y1, p.y0 + p.data.rows());
    x1 = std::max(x1, p.x0 + p.data.cols());
  }
  const int k_count = pi.instances();
  for (int y = y0; y < y1; ++y)
    for (int x = x0; x < x1; ++x) {
      double total = 0.0;
      for (int k = 1; k <= k_count; ++k) total += pi.at(k, y, x);
      const double denom = total > 1.0 + 1e-9 ? total : 1.0;
      double fg = 0.0;
      for (int k = 1; k <= k_count; ++k) {
        const double v = pi.at(k, y, x) / denom;
        pi.at(k, y, x) = v;
        fg += v;
      }
      pi.at(0, y, x) = std::max(0.0, 1.0 - fg);
    }
  return pi;
}

}  // namespace

void PosteriorNoise::validate() const {
  if (!(mask_jitter >= 0.0 && mask_jitter <= 1.0))
    throw ParameterError("PosteriorNoise: mask_jitter must lie in [0, 1]");
  if (!(box_jitter_px >= 0.0)) throw ParameterError("PosteriorNoise: box_jitter_px must be >= 0");
  if (!(drop_prob >= 0.0 && drop_prob <= 1.0)) throw ParameterError("PosteriorNoise: drop_prob must lie in [0, 1]");
  if (!(split_prob >= 0.0 && split_prob <= 1.0))
    throw ParameterError("PosteriorNoise: split_prob must lie in [0, 1]");
}

PosteriorSimulator::PosteriorSimulator(const MixingStack& truth_pi, int min_obj_px, PosteriorNoise noise)
    : truth_(&truth_pi), noise_(noise) {
  noise.validate();
  if (min_obj_px <= 0) throw ParameterError("PosteriorSimulator: min_obj_px must be positive");
  morph_max_ = static_cast<int>(std::lround(noise.mask_jitter * min_obj_px));
  shift_max_ = static_cast<int>(std::floor(noise.box_jitter_px));
  for (int k = 1; k <= truth_pi.instances(); ++k) {
    Patch full{0, 0, Plane(truth_pi.height(), truth_pi.width(), 0.0)};
    std::copy(truth_pi.plane(k).begin(), truth_pi.plane(k).end(), full.data.values().begin());
    patches_.push_back(tighten(full));
  }
}

bool PosteriorSimulator::draw(int row0, int col0, int height, int width, Rng& rng, std::vector<Patch>& planes) const {
  if (height <= 0 || width <= 0) throw DimensionError("PosteriorSimulator: window must be non-empty");
  bool changed = false;
  for (const auto& truth : patches_) {
    if (truth.data.empty()) continue;
    // Window-local patch, as crop_stack would see it.
    Patch local = clip({truth.y0 - row0, truth.x0 - col0, truth.data}, height, width);
    if (local.data.empty() || !has_mass(local)) continue;

    // Fixed draw count per instance keeps the stream aligned across noise levels.
    const double u_drop = uniform01(rng);
    const double u_split = uniform01(rng);
    const auto radius = static_cast<int>(uniform_int(rng, -morph_max_, morph_max_));
    const auto dy = static_cast<int>(uniform_int(rng, -shift_max_, shift_max_));
    const auto dx = static_cast<int>(uniform_int(rng, -shift_max_, shift_max_));
    if (u_drop < noise_.drop_prob) {
      changed = true;
      continue;
    }
    // Morphology sees only the window, like a decoder run on the crop.
    Patch p = clip(morph(local, radius), height, width);
    p.y0 += dy;
    p.x0 += dx;
    p = tighten(clip(p, height, width));
    changed = changed || radius != 0 || dy != 0 || dx != 0;
    if (p.data.empty()) continue;
    if (u_split < noise_.split_prob) {
      auto [a, b] = split(p, rng);
      changed = true;
      if (has_mass(a)) planes.push_back(tighten(a));
      if (has_mass(b)) planes.push_back(tighten(b));
    } else {
      planes.push_back(std::move(p));
    }
  }
  return changed;
}

MixingStack PosteriorSimulator::sample(int row0, int col0, int height, int width, Rng& rng) const {
  std::vector<Patch> planes;
  if (!draw(row0, col0, height, width, rng, planes)) return crop_stack(*truth_, row0, col0, height, width);
  return paint(planes, height, width);
}

std::vector<MixingStack> simulate_posterior_samples(const MixingStack& truth_pi, int min_obj_px,
                                                    const PosteriorNoise& noise, int n_post, Rng& rng) {
  if (n_post < 1) throw ParameterError("simulate_posterior_samples: n_post must be >= 1");
  const PosteriorSimulator sim(truth_pi, min_obj_px, noise);
  std::vector<MixingStack> samples;
  samples.reserve(static_cast<std::size_t>(n_post));
  for (int s = 0; s < n_post; ++s) {
    std::vector<PosteriorSimulator::Patch> planes;
    const bool changed = sim.draw(0, 0, truth_pi.height(), truth_pi.width(), rng, planes);
    samples.push_back(changed ? paint(planes, truth_pi.height(), truth_pi.width()) : truth_pi);
  }
  return samples;
}

std::vector<MixingStack> simulate_posterior_samples(const SceneBundle& bundle, const PosteriorNoise& noise,
                                                    int n_post, Rng& rng) {
  return simulate_posterior_samples(bundle.truth_pi, bundle.grid.min_obj_px(), noise, n_post, rng);
}

MixingStack crop_stack(const MixingStack& pi, int row0, int col0, int height, int width) {
  std::vector<Plane> planes;
  for (int k = 1; k <= pi.instances(); ++k) {
    Plane p(height, width, 0.0);
    bool any = false;
    for (int y = 0; y < height; ++y) {
      const int sy = row0 + y;
      if (sy < 0 || sy >= pi.height()) continue;
      for (int x = 0; x < width; ++x) {
        const int sx = col0 + x;
        if (sx < 0 || sx >= pi.width()) continue;
        const double v = pi.at(k, sy, sx);
        p(y, x) = v;
        any = any || v > 0.0;
      }
    }
    if (any) planes.push_back(std::move(p));
  }
  // Copy pi_0 verbatim so the window agrees bit-for-bit with the source.
  MixingStack out(static_cast<int>(planes.size()), height, width);
  for (int y = 0; y < height; ++y)
    for (int x = 0; x < width; ++x) {
      const int sy = row0 + y;
      const int sx = col0 + x;
      const bool inside = sy >= 0 && sy < pi.height() && sx >= 0 && sx < pi.width();
      out.at(0, y, x) = inside ? pi.at(0, sy, sx) : 1.0;
    }
  for (std::size_t k = 0; k < planes.size(); ++k)
    std::copy(planes[k].values().begin(), planes[k].values().end(), out.plane(static_cast<int>(k) + 1).begin());
  return out;
}

}  // namespace segstitch

#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "segstitch/array.hpp"
#include "segstitch/boxes.hpp"
#include "segstitch/dpp.hpp"
#include "segstitch/grid.hpp"
#include "segstitch/rng.hpp"

namespace segstitch {

/// Upper clamp on rendered foreground weights, keeping them in [0, 1).
inline constexpr double kWeightCeiling = 1.0 - 1e-3;

/// Foreground raster before placement: appearance y^c and weights w^c.
struct Raster {
  Image appearance;
  Array2D<double> weights;
};

/// A raster placed on the canvas. Zero outside its box.
struct Layer {
  Image appearance;
  Array2D<double> weights;
  BoundingBox box;
};

/// Per-pixel simplex over background (index 0) and K instances.
class MixingStack {
 public:
  MixingStack() = default;
  /// All mass on the background.
  MixingStack(int instances, int height, int width);

  int instances() const noexcept { return instances_; }
  int height() const noexcept { return height_; }
  int width() const noexcept { return width_; }
  std::size_t pixels() const noexcept { return static_cast<std::size_t>(height_) * width_; }

  double& at(int k, int y, int x) noexcept { return data_[offset(k, y, x)]; }
  double at(int k, int y, int x) const noexcept { return data_[offset(k, y, x)]; }
  /// Plane k as a flat row-major span.
  std::span<double> plane(int k) noexcept { return {data_.data() + offset(k, 0, 0), pixels()}; }
  std::span<const double> plane(int k) const noexcept { return {data_.data() + offset(k, 0, 0), pixels()}; }

  /// Throws DimensionError / ParameterError unless every column is a
  /// non-negative vector summing to 1 within tol.
  void validate(double tol = 1e-6) const;

  friend bool operator==(const MixingStack&, const MixingStack&) = default;

 private:
  std::size_t offset(int k, int y, int x) const noexcept {
    return (static_cast<std::size_t>(k) * height_ + y) * width_ + x;
  }

  int instances_ = 0;
  int height_ = 0;
  int width_ = 0;
  std::vector<double> data_;
};

/// Instance label per pixel, 0 = background.
using LabelMap = Array2D<std::int32_t>;

struct FourierHarmonic {
  double amplitude = 0.0;
  double phase = 0.0;
};

/// Blob boundary r(theta) = mean_radius + sum_i a_i cos(i theta + phi_i)
/// around origin, in raster pixel coordinates.
struct FourierBlobParams {
  double origin_x = 0.0;
  double origin_y = 0.0;
  double mean_radius = 1.0;
  std::vector<FourierHarmonic> harmonics;
  double intensity = 1.0;
};

inline constexpr int kMaxBlobHarmonics = 5;
inline constexpr double kMaxHarmonicAmplitude = 0.4;  // times mean_radius

/// Boundary radius at angle theta.
double blob_radius(const FourierBlobParams& params, double theta);

/// Binary blob: weight kWeightCeiling and appearance = intensity inside the
/// boundary (pixel centers), zero outside. Throws ParameterError if the radial
/// function is not strictly positive.
Raster render_blob(const FourierBlobParams& params, int height, int width, int channels = 1);

enum class BackgroundKind { flat, oriented_grid };

inline constexpr std::array<double, 4> kGridAnglesDeg{0.0, 45.0, 90.0, 135.0};

struct BackgroundSpec {
  BackgroundKind kind = BackgroundKind::flat;
  double level = 0.0;        // flat value and grid base level
  double spacing_px = 8.0;   // grid period, >= 2
  double angle_deg = 0.0;    // one of kGridAnglesDeg
  double contrast = 0.3;     // added on grid lines
  double line_width_px = 1.0;
  double phase_px = 0.0;
};

/// flat: constant image. oriented_grid: lines where the coordinate along the
/// grid normal, x cos a + y sin a, falls within line_width of a multiple of
/// spacing. Angle 0 gives vertical lines (period along columns).
Image render_background(const BackgroundSpec& bg, int height, int width, int channels = 1);

/// Bilinear placement of a raster into box on a height x width canvas, zero
/// padded. Pixels whose centers fall outside the box stay zero.
Layer paste(const Raster& raster, const BoundingBox& box, int height, int width);

/// Bilinear read of the box region into an out_h x out_w array; reads outside
/// the image are zero.
Image crop(const Image& image, const BoundingBox& box, int out_h, int out_w);
Array2D<double> crop(const Array2D<double>& plane, const BoundingBox& box, int out_h, int out_w);

/// pi_k = w_k / max(1, sum_j w_j), pi_0 = 1 - sum_k pi_k, pixel-wise.
MixingStack mix(std::span<const Array2D<double>> weights, int height, int width);
MixingStack mix(std::span<const Layer> layers, int height, int width);

/// Independent categorical draw per pixel.
LabelMap sample_mask(const MixingStack& pi, Rng& rng);

/// x(p) = y_{m(p)}(p) + sigma * N(0, 1). layers[k - 1] is instance k.
Image compose(const LabelMap& mask, const Image& background, std::span<const Layer> layers,
              double sigma, Rng& rng);

/// Ranges for randomly drawn blobs. Radii are fractions of half the raster
/// side; harmonic amplitudes are fractions of the drawn mean radius.
struct BlobPrior {
  double radius_frac_min = 0.45;
  double radius_frac_max = 0.7;
  int max_harmonics = 3;
  double max_amplitude_frac = 0.2;
  double origin_jitter_frac = 0.05;
  double intensity = 1.0;
};

FourierBlobParams sample_blob_params(const BlobPrior& prior, int raster_h, int raster_w, Rng& rng);

struct BackgroundPrior {
  BackgroundKind kind = BackgroundKind::flat;
  double level = 0.0;
  double spacing_min_px = 6.0;
  double spacing_max_px = 14.0;
  double contrast = 0.3;
  double line_width_px = 1.0;
};

struct SceneConfig {
  GridSpec grid{80, 80, 20, 40};
  KernelParams kernel{0.55, 1.0};
  SafParams saf = SafParams::identity();
  int raster_h = 28;
  int raster_w = 28;
  int channels = 1;
  BlobPrior blob;
  BackgroundPrior background;
  double sigma = 0.05;
};

struct SceneBundle {
  GridSpec grid;
  Image image;
  LabelMap truth_labels;
  std::vector<BoundingBox> truth_boxes;
  MixingStack truth_pi;
  Image background;
  double sigma = 0.05;
};

/// Forward model with cached DPP sampler, for generating many scenes from one
/// configuration.
class SceneGenerator {
 public:
  explicit SceneGenerator(SceneConfig config);

  SceneBundle generate(Rng& rng) const;
  const SceneConfig& config() const noexcept { return config_; }
  const KernelMatrix& kernel() const noexcept { return kernel_; }

 private:
  SceneConfig config_;
  KernelMatrix kernel_;
  DppSampler sampler_;
};

/// c ~ DPP -> v ~ N(0, I4) -> boxes -> blobs -> paste -> mix -> mask -> compose.
SceneBundle generate_scene(const SceneConfig& config, Rng& rng);

struct PosteriorNoise {
  double mask_jitter = 0.0;    // morphology radius up to mask_jitter * min_obj px
  double box_jitter_px = 0.0;  // translation up to this many px per axis
  double drop_prob = 0.0;
  double split_prob = 0.0;

  void validate() const;
};

/// Perturbed copies of a truth stack standing in for posterior samples of a
/// trained inference network: per instance, a grayscale dilation/erosion of
/// random radius, an integer translation, dropping, and splitting along a
/// random line through the centroid. With zero noise every sample equals the
/// input.
std::vector<MixingStack> simulate_posterior_samples(const MixingStack& truth_pi, int min_obj_px,
                                                    const PosteriorNoise& noise, int n_post, Rng& rng);
std::vector<MixingStack> simulate_posterior_samples(const SceneBundle& bundle, const PosteriorNoise& noise,
                                                    int n_post, Rng& rng);

/// Window-level posterior stand-in. Each instance is kept as a tight patch, so
/// a window sample only touches the instances it overlaps. sample() returns the
/// same stack as simulating one sample from crop_stack() of the window.
class PosteriorSimulator {
 public:
  PosteriorSimulator(const MixingStack& truth_pi, int min_obj_px, PosteriorNoise noise);

  MixingStack sample(int row0, int col0, int height, int width, Rng& rng) const;

  struct Patch {
    int y0 = 0;
    int x0 = 0;
    Array2D<double> data;
  };

  /// Noisy instance patches in window coordinates; false when the draw left
  /// every instance untouched.
  bool draw(int row0, int col0, int height, int width, Rng& rng, std::vector<Patch>& planes) const;

 private:
  const MixingStack* truth_;
  int morph_max_;
  int shift_max_;
  PosteriorNoise noise_;
  std::vector<Patch> patches_;  // instance k at index k - 1; empty data when the plane has no mass
};

/// Window of a stack starting at (row0, col0); outside the source the window is
/// background. Instances with no mass inside the window are dropped.
MixingStack crop_stack(const MixingStack& pi, int row0, int col0, int height, int width);

/// Normalizes non-negative instance planes into a stack the same way mix()
/// does, except that columns whose mass is already <= 1 are left untouched.
MixingStack stack_from_planes(std::span<const Array2D<double>> planes, int height, int width);

}  // namespace segstitch

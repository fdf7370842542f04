#pragma once

#include <cstdint>

#include "segstitch/array.hpp"

namespace segstitch {

/// Native pixel grid plus the coarse object grid derived from the minimum
/// object size. Coarse dimensions are ceil(H / min_obj) x ceil(W / min_obj).
class GridSpec {
 public:
  GridSpec() = default;
  GridSpec(int height_px, int width_px, int min_obj_px, int max_obj_px);

  int height_px() const noexcept { return height_px_; }
  int width_px() const noexcept { return width_px_; }
  int min_obj_px() const noexcept { return min_obj_px_; }
  int max_obj_px() const noexcept { return max_obj_px_; }
  int coarse_h() const noexcept { return coarse_h_; }
  int coarse_w() const noexcept { return coarse_w_; }
  int coarse_size() const noexcept { return coarse_h_ * coarse_w_; }
  int native_size() const noexcept { return height_px_ * width_px_; }

  friend bool operator==(const GridSpec&, const GridSpec&) = default;

 private:
  int height_px_ = 0;
  int width_px_ = 0;
  int min_obj_px_ = 0;
  int max_obj_px_ = 0;
  int coarse_h_ = 0;
  int coarse_w_ = 0;
};

/// Object-presence field over the coarse grid (values 0/1).
class BinaryField : public Array2D<std::uint8_t> {
 public:
  BinaryField() = default;
  BinaryField(int rows, int cols) : Array2D<std::uint8_t>(rows, cols, 0) {}

  int cardinality() const noexcept;
};

/// Per-cell probabilities in [0, 1] over the coarse grid.
class ProbField : public Array2D<double> {
 public:
  ProbField() = default;
  ProbField(int rows, int cols, double fill = 0.0);

  /// Throws ParameterError if any entry is outside [0, 1] or NaN.
  void validate() const;
};

}  // namespace segstitch

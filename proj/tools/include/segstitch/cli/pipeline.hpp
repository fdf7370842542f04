#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "segstitch/cli/config.hpp"
#include "segstitch/cli/dataset.hpp"
#include "segstitch/consensus.hpp"

namespace segstitch::cli {

/// Pixel rectangle; an all-zero region means the whole image.
struct Region {
  int x = 0;
  int y = 0;
  int w = 0;
  int h = 0;

  bool whole() const noexcept { return w == 0 && h == 0 && x == 0 && y == 0; }
  /// Throws ParameterError unless the region is non-empty and inside the image.
  void validate(int height, int width) const;
  friend bool operator==(const Region&, const Region&) = default;
};

enum class WindowMode { overlapping, disjoint };
enum class ResolutionMode { fixed, automatic };

struct SegmentOptions {
  WindowMode windows = WindowMode::overlapping;
  ResolutionMode resolution = ResolutionMode::fixed;
  std::optional<double> gamma;  // overrides the config
  std::uint64_t seed = 1;
  Region region;
  /// Empty: simulate posteriors from the scene truth. Otherwise a directory of
  /// r{row}_c{col}_s{s}.mimg stacks keyed by window origin.
  std::filesystem::path samples_dir;
  bool score = false;
  bool keep_graph = false;
  int max_workers = 0;
};

struct SegmentOutput {
  LabelMap labels;
  int communities = 0;
  double gamma = 0.0;
  std::size_t edges = 0;
  std::vector<double> gamma_scores;
  double score = 0.0;
  EdgeList graph;
  LabelMap truth;  // argmax of the truth stack over the region; empty without truth
};

/// File name of posterior sample s for the window whose top-left corner sits at
/// (row0, col0) in image coordinates (negative inside the padding).
std::string sample_file_name(int row0, int col0, int s);

/// The truth stack restricted to the region (whole image when empty).
MixingStack region_truth(const SceneData& scene, const Region& region);

/// Sampler drawing window samples from a PosteriorSimulator around truth.
/// Sample s of the window at (row0, col0) uses make_rng(seed, "sample",
/// hash of (row0, col0, s)), so overlapping and disjoint plans share draws
/// for windows at the same origin.
WindowSampler simulated_sampler(std::shared_ptr<const PosteriorSimulator> sim, int window_px, std::uint64_t seed);

/// Sampler reading r{row}_c{col}_s{s}.mimg files.
WindowSampler file_sampler(const std::filesystem::path& dir, int window_px);

/// Writes the simulated samples that the given mode would read, so that a
/// files-mode run reproduces the simulate-mode result.
void export_samples(const SceneData& scene, const RunConfig& cfg, WindowMode mode, std::uint64_t seed,
                    const std::filesystem::path& dir);

/// Consensus (overlapping) or disjoint point-estimate segmentation of one
/// scene with the given options.
SegmentOutput run_segment(const SceneData& scene, const RunConfig& cfg, const SegmentOptions& opt);

}  // namespace segstitch::cli
